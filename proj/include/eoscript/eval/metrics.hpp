#pragma once

// Answer matching and tool-level metrics. All functions are pure.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "eoscript/raster.hpp"

namespace eoscript::eval {

enum class EvalErrc { LengthMismatch, EmptyInput, ShapeMismatch, DegenerateBox, DatasetParseError };

std::string_view to_string(EvalErrc code);

class EvalError : public std::runtime_error {
 public:
  EvalError(EvalErrc code, const std::string& message);
  EvalErrc code() const noexcept { return code_; }

 private:
  EvalErrc code_;
};

// Trimmed, lowercased; yes/true and no/false collapse to "true"/"false".
std::string normalize_answer(const std::string& text);

// Numbers match within `rel_tol` of the expected value; everything else must be
// equal after normalization. Pass rel_tol = 0 for exact counting answers.
bool score_answer(const std::string& expected, const std::string& actual, double rel_tol = 0.01);

double top1_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

struct MiouResult {
  std::map<int, double> per_class;  // only classes present in pred or truth
  double mean = 0.0;
};

// Classes absent from both masks are left out; two empty masks give mean 0 with no classes.
MiouResult miou(const Mask& pred, const Mask& truth, int num_classes);

// Nonzero pixels are "true". Both empty gives 1.0.
double binary_iou(const Mask& pred, const Mask& truth);

}  // namespace eoscript::eval
