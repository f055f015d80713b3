#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eoscript/script/ast.hpp"

namespace eoscript::script {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, int col, const std::string& message);
  int line() const noexcept { return line_; }
  int col() const noexcept { return col_; }
  // Message without the position prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  int line_;
  int col_;
  std::string detail_;
};

enum class TokenKind {
  Ident,
  Int,
  Real,
  String,
  True,
  False,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Dot,
  Assign,
  Plus,
  Minus,
  Star,
  Slash,
  EqEq,
  NotEq,
  Lt,
  Le,
  Gt,
  Ge,
  In,
  Newline,
  End,
};

struct Token {
  TokenKind kind;
  std::string text;  // identifier name or decoded string literal
  std::int64_t int_value = 0;
  double real_value = 0.0;
  Span span;
};

// Newlines inside brackets are dropped; comments run from '#' to end of line;
// indentation is insignificant. Python keywords outside the dialect are rejected.
std::vector<Token> tokenize(std::string_view source);

const char* token_name(TokenKind kind);

}  // namespace eoscript::script
