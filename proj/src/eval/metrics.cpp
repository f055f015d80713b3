#include "eoscript/eval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <set>

namespace eoscript::eval {

std::string_view to_string(EvalErrc code) {
  switch (code) {
    case EvalErrc::LengthMismatch: return "LengthMismatch";
    case EvalErrc::EmptyInput: return "EmptyInput";
    case EvalErrc::ShapeMismatch: return "ShapeMismatch";
    case EvalErrc::DegenerateBox: return "DegenerateBox";
    case EvalErrc::DatasetParseError: return "DatasetParseError";
  }
  return "EvalError";
}

EvalError::EvalError(EvalErrc code, const std::string& message) : std::runtime_error(message), code_(code) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (c != ',' && c != '_') s += c;
  }
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

void require_same_shape(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw EvalError(EvalErrc::ShapeMismatch, "mask shapes differ: " + std::to_string(a.width()) + "x" +
                                                 std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                                 "x" + std::to_string(b.height()));
  }
}

}  // namespace

std::string normalize_answer(const std::string& text) {
  std::string s = trim(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = trim(s.substr(1, s.size() - 2));
  if (s == "yes" || s == "true") return "true";
  if (s == "no" || s == "false") return "false";
  return s;
}

bool score_answer(const std::string& expected, const std::string& actual, double rel_tol) {
  const std::string e = normalize_answer(expected);
  const std::string a = normalize_answer(actual);
  const auto en = parse_number(e);
  const auto an = parse_number(a);
  if (en && an) {
    if (rel_tol <= 0.0 || *en == 0.0) return *en == *an;
    return std::abs(*an - *en) <= rel_tol * std::abs(*en);
  }
  return e == a;
}

double top1_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) {
    throw EvalError(EvalErrc::LengthMismatch, "prediction count " + std::to_string(pred.size()) +
                                                  " differs from truth count " + std::to_string(truth.size()));
  }
  if (truth.empty()) throw EvalError(EvalErrc::EmptyInput, "no labels to score");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

MiouResult miou(const Mask& pred, const Mask& truth, int num_classes) {
  require_same_shape(pred, truth);
  std::map<int, std::size_t> inter;
  std::map<int, std::size_t> uni;
  const auto& p = pred.values();
  const auto& t = truth.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == t[i]) {
      ++inter[p[i]];
      ++uni[p[i]];
    } else {
      ++uni[p[i]];
      ++uni[t[i]];
    }
  }
  MiouResult out;
  double total = 0.0;
  for (const auto& [cls, u] : uni) {
    if (num_classes > 0 && (cls < 0 || cls >= num_classes)) continue;
    const double iou = static_cast<double>(inter[cls]) / static_cast<double>(u);
    out.per_class[cls] = iou;
    total += iou;
  }
  if (!out.per_class.empty()) out.mean = total / static_cast<double>(out.per_class.size());
  return out;
}

double binary_iou(const Mask& pred, const Mask& truth) {
  require_same_shape(pred, truth);
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto& p = pred.values();
  const auto& t = truth.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool a = p[i] != 0;
    const bool b = t[i] != 0;
    inter += (a && b) ? 1 : 0;
    uni += (a || b) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace eoscript::eval
