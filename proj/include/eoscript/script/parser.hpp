#pragma once

// Recursive-descent parser for the tool-script dialect:
//
//   program = {stmt NEWLINE}
//   stmt    = IDENT "=" expr | expr
//   expr    = cmp
//   cmp     = add {("==" | "!=" | "<" | "<=" | ">" | ">=" | "in") add}
//   add     = mul {("+" | "-") mul}
//   mul     = post {("*" | "/") post}
//   post    = atom {"(" args ")" | "." IDENT "(" args ")" | "[" expr "]"}
//   atom    = IDENT | NUMBER | STRING | "True" | "False" | "[" args "]" | "(" expr ")" | "-" atom
//
// Every operator level is left-associative, comparisons included.

#include <string>
#include <string_view>

#include "eoscript/script/ast.hpp"
#include "eoscript/script/lexer.hpp"

namespace eoscript::script {

// Throws SyntaxError.
Program parse_program(std::string_view source);

struct FenceStripResult {
  std::string code;
  bool stripped = false;
};

// Drops lines that open or close a markdown code fence; everything else is kept verbatim.
FenceStripResult strip_code_fences(std::string_view text);

}  // namespace eoscript::script
