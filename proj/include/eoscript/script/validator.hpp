#pragma once

// Static checks run before execution. A script has valid calls when every call
// target is a registered tool or a permitted builtin, every method is permitted,
// arities match the declared signatures, and every name is bound before use.

#include <string>
#include <string_view>
#include <vector>

#include "eoscript/registry.hpp"
#include "eoscript/script/ast.hpp"

namespace eoscript::script {

struct Diagnostic {
  Span span;
  std::string message;
};

struct Verdict {
  bool syntactically_valid = false;
  bool calls_valid = false;
  std::vector<Diagnostic> diagnostics;
};

inline constexpr std::string_view kBuiltinFunctions[] = {"print", "len", "round", "abs"};
inline constexpr std::string_view kPermittedMethods[] = {"sum", "mean", "count"};

bool is_builtin_function(std::string_view name);
bool is_permitted_method(std::string_view name);

Verdict validate_calls(const Program& program, const Registry& registry);

// Parses then validates; syntax errors become a diagnostic.
Verdict check_source(std::string_view source, const Registry& registry);

// "line:col: message" per diagnostic, one per line.
std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics);

}  // namespace eoscript::script
