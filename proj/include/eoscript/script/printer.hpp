#pragma once

// Canonical source rendering with the fewest parentheses that preserve the tree,
// so parse(print(p)) equals p and printing is a fixed point.

#include <string>

#include "eoscript/script/ast.hpp"

namespace eoscript::script {

std::string print_expr(const Expr& expr);
std::string print_program(const Program& program);
std::string quote_string(const std::string& text);

}  // namespace eoscript::script
