#pragma once

// Tool descriptions, bindings and call records.
//
// Every tool carries a description built from fixed sections: a general
// description, a technical description (with a machine-checkable argument
// schema), and for model tools the supported sensors with their expected
// input normalization, a usage example and the training datasets with their
// taxonomies.

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <json.hpp>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "eoscript/value.hpp"

namespace eoscript {

class SceneProvider;

enum class ToolCategory { Data, Model };

enum class ArgType { Any, Int, Number, String, Bool, List, Raster, Mask, Image, Grid };

std::string to_string(ToolCategory category);
std::string to_string(ArgType type);
std::optional<ArgType> parse_arg_type(std::string_view text);

// Image accepts a path string or a raster; Grid accepts a raster or a mask.
bool arg_type_accepts(ArgType type, const Value& value);

struct ArgSpec {
  std::string name;
  ArgType type = ArgType::Any;
  bool optional = false;
  std::string description;
};

struct Signature {
  std::vector<ArgSpec> args;
  std::string returns;  // documentation only
  bool variadic = false;

  std::size_t min_arity() const;
  std::optional<std::size_t> max_arity() const;
  // Returns an empty string when `args` conform, otherwise the first problem.
  std::string check(std::span<const Value> values) const;
};

struct SensorSupport {
  std::string sensor;
  std::map<std::string, std::string> band_mapping;  // sensor channel -> canonical band
  std::string normalization;
};

struct TrainingDataset {
  std::string name;
  std::map<int, std::string> taxonomy;  // class id -> label
};

// Per-call environment handed to tool implementations.
struct ToolContext {
  std::vector<std::filesystem::path> attachments;
  std::filesystem::path scratch_dir;
  std::filesystem::path artifact_dir;
  std::vector<std::string>* artifacts = nullptr;
  std::shared_ptr<const SceneProvider> scenes;
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
};

using BuiltinFn = std::function<Value(std::span<const Value>, ToolContext&)>;

struct ExternalBinding {
  std::vector<std::string> cmd;
  double timeout_s = 30.0;
  std::string resources;  // opaque scheduling hint, e.g. "gpu"
};

using ToolBinding = std::variant<BuiltinFn, ExternalBinding>;

struct ToolSpec {
  std::string name;
  ToolCategory category = ToolCategory::Data;
  std::string general_description;
  std::string technical_description;
  std::optional<Signature> signature;
  std::vector<SensorSupport> supported_sensors;
  std::optional<std::string> usage_example;
  std::vector<TrainingDataset> training_datasets;
  ToolBinding binding;

  bool is_external() const { return std::holds_alternative<ExternalBinding>(binding); }

  // Throws std::invalid_argument on a broken description invariant.
  void validate() const;

  // Union of all training taxonomies.
  std::map<int, std::string> taxonomy() const;
};

bool is_valid_tool_name(std::string_view name);

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Manifest JSON. `technical_description` may be plain text or
// {"text": ..., "args": [{"name", "type", "optional"?, "description"?}], "returns": ..., "variadic"?}.
ToolSpec parse_manifest(const nlohmann::json& doc);
nlohmann::json to_manifest_json(const ToolSpec& spec);

struct ToolCallRecord {
  std::string tool;
  std::string args_digest;
  std::chrono::system_clock::time_point start;
  std::chrono::system_clock::time_point stop;
  bool ok = true;
  std::string error;
  std::string output_summary;
};

nlohmann::json to_json(const ToolCallRecord& record);
ToolCallRecord tool_call_from_json(const nlohmann::json& doc);

// ISO-8601 UTC with milliseconds, e.g. 2026-01-02T03:04:05.678Z.
std::string format_timestamp(std::chrono::system_clock::time_point t);
std::chrono::system_clock::time_point parse_timestamp(const std::string& text);

}  // namespace eoscript
