#pragma once

// Guarded evaluator. Statements run in order in one scope; the only effects
// available to a script are tool calls (each logged) and printed lines.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eoscript/registry.hpp"
#include "eoscript/script/ast.hpp"

namespace eoscript::script {

struct Limits {
  std::uint64_t max_steps = 1'000'000;
  std::chrono::milliseconds wall_clock{60'000};
  std::size_t max_value_store_bytes = 256ULL << 20;
  std::size_t max_tool_calls = 16;
};

enum class ErrorKind {
  NameError,
  TypeError,
  ValueError,
  IndexError,
  ZeroDivisionError,
  ResourceLimit,
  ToolError,
};

std::string_view to_string(ErrorKind kind);

// Limit identifiers used in ResourceLimit errors.
inline constexpr const char* kLimitSteps = "steps";
inline constexpr const char* kLimitWallClock = "wall_clock";
inline constexpr const char* kLimitValueStore = "value_store";
inline constexpr const char* kLimitToolCalls = "tool_calls";

class ScriptError : public std::runtime_error {
 public:
  ScriptError(ErrorKind kind, Span span, const std::string& message, std::string detail = {});
  ErrorKind kind() const noexcept { return kind_; }
  const Span& span() const noexcept { return span_; }
  // Which limit (ResourceLimit) or the tool error code (ToolError).
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  Span span_;
  std::string detail_;
};

struct ExecutionContext {
  std::vector<std::filesystem::path> attachments;
  std::filesystem::path scratch_dir;
  std::filesystem::path artifact_dir;
  std::shared_ptr<const SceneProvider> scenes;
  Limits limits;
};

struct ResourceUsage {
  std::uint64_t steps = 0;
  std::int64_t wall_ms = 0;
  std::size_t peak_value_store_bytes = 0;
  std::size_t tool_calls = 0;
};

struct ExecutionResult {
  bool success = false;
  std::vector<std::string> output;
  std::vector<ToolCallRecord> tool_calls;
  std::vector<std::string> artifacts;
  std::optional<ScriptError> error;
  ResourceUsage resources;
};

// Never throws for script-level failures; they land in `error`.
ExecutionResult execute_program(const Program& program, const Registry& registry, const ExecutionContext& ctx);

}  // namespace eoscript::script
