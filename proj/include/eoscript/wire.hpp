#pragma once

// External tool wire protocol.
//
//   request  (stdin):  {"tool": "<name>", "args": [Value, ...]}
//   response (stdout): {"status": "ok", "value": Value}
//                    | {"status": "error", "message": "..."}
//
// Value encoding: null, booleans, integers, reals and strings map to JSON
// natively; lists to arrays. Rasters and masks travel as sidecar files:
// {"kind": "raster" | "mask", "path": "<header .json path>"}. Non-finite
// reals use {"kind": "real", "value": "inf" | "-inf" | "nan"}.

#include <atomic>
#include <filesystem>
#include <json.hpp>
#include <string>

#include "eoscript/value.hpp"

namespace eoscript {

// Writes raster/mask payloads under `spill_dir` with unique names.
class ValueEncoder {
 public:
  explicit ValueEncoder(std::filesystem::path spill_dir, std::string prefix = "arg");
  nlohmann::json encode(const Value& value);

 private:
  std::filesystem::path spill_dir_;
  std::string prefix_;
  int counter_ = 0;
};

// Relative sidecar paths resolve against `base_dir`.
Value decode_value(const nlohmann::json& doc, const std::filesystem::path& base_dir);

nlohmann::json make_request(const std::string& tool, const nlohmann::json& encoded_args);

struct ToolResponse {
  bool ok = false;
  nlohmann::json value;  // when ok
  std::string message;   // when !ok
};

// Throws std::invalid_argument if `text` is not a well-formed response document.
ToolResponse parse_response(const std::string& text);

}  // namespace eoscript
