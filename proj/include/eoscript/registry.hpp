#pragma once

// Central tool registry: builtins (data access, spectral indices, geospatial
// operators) plus external tools discovered from manifest files.

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eoscript/tool_spec.hpp"

namespace eoscript {

enum class ToolErrc {
  UnknownTool,
  ArgumentMismatch,
  ToolTimeout,
  ToolCrashed,
  MalformedToolOutput,
  ToolFailed,
  ManifestParseError,
  DuplicateToolName,
};

std::string_view to_string(ToolErrc code);

// what() is the message exactly as the tool reported it.
class ToolError : public std::runtime_error {
 public:
  ToolError(ToolErrc code, std::string tool, const std::string& message);
  ToolErrc code() const noexcept { return code_; }
  const std::string& tool() const noexcept { return tool_; }

 private:
  ToolErrc code_;
  std::string tool_;
};

class Registry {
 public:
  Registry() = default;

  static Registry with_builtins();

  // Validates the tool description; throws ToolError(DuplicateToolName) on a clash.
  void add(ToolSpec spec);

  const ToolSpec* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  std::size_t size() const noexcept { return tools_.size(); }

  // Sorted by name.
  std::vector<const ToolSpec*> tools() const;

 private:
  std::map<std::string, ToolSpec, std::less<>> tools_;
};

std::vector<ToolSpec> builtin_tools();

// Builtins plus every `*.json` manifest in `dir` (read in filename order).
// A missing directory contributes nothing.
Registry load_registry(const std::filesystem::path& dir);

// Deterministic text catalog for prompting; tools sorted by name, sections in fixed order.
std::string render_prompt_catalog(const Registry& registry);
std::string render_tool_block(const ToolSpec& spec);

// Dispatches a call and appends exactly one record to `log`, also on failure.
Value invoke_tool(const Registry& registry, std::string_view name, std::span<const Value> args, ToolContext& ctx,
                  std::vector<ToolCallRecord>& log);

// Content digest of call arguments; independent of file locations.
std::string digest_args(std::span<const Value> args);

}  // namespace eoscript
