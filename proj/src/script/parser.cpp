#include "eoscript/script/parser.hpp"

#include <algorithm>
#include <optional>

namespace eoscript::script {

namespace {

Span join(const Span& a, const Span& b) { return Span{a.line, a.col, b.end_line, b.end_col}; }

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program program() {
    Program prog;
    while (peek().kind != TokenKind::End) {
      if (peek().kind == TokenKind::Newline) {
        ++pos_;
        continue;
      }
      prog.statements.push_back(statement());
      if (peek().kind != TokenKind::Newline && peek().kind != TokenKind::End) {
        unexpected("expected end of statement");
      }
    }
    return prog;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool accept(TokenKind k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }

  [[noreturn]] void unexpected(const std::string& what) const {
    const Token& t = peek();
    std::string got = token_name(t.kind);
    if (t.kind == TokenKind::Ident) got = "'" + t.text + "'";
    throw SyntaxError(t.span.line, t.span.col, what + ", found " + got);
  }

  const Token& expect(TokenKind k, const char* context) {
    if (peek().kind != k) unexpected(std::string("expected ") + token_name(k) + " " + context);
    return take();
  }

  Stmt statement() {
    if (peek().kind == TokenKind::Ident && peek(1).kind == TokenKind::Assign) {
      const Token& name = take();
      take();
      ExprPtr value = expr();
      return Stmt{AssignStmt{name.text, name.span, value}, join(name.span, value->span)};
    }
    ExprPtr e = expr();
    if (peek().kind == TokenKind::Assign) unexpected("only a plain name can be assigned to");
    return Stmt{ExprStmt{e}, e->span};
  }

  ExprPtr expr() { return comparison(); }

  std::optional<BinaryOp> comparison_op() const {
    switch (peek().kind) {
      case TokenKind::EqEq: return BinaryOp::Eq;
      case TokenKind::NotEq: return BinaryOp::Ne;
      case TokenKind::Lt: return BinaryOp::Lt;
      case TokenKind::Le: return BinaryOp::Le;
      case TokenKind::Gt: return BinaryOp::Gt;
      case TokenKind::Ge: return BinaryOp::Ge;
      case TokenKind::In: return BinaryOp::In;
      default: return std::nullopt;
    }
  }

  ExprPtr comparison() {
    ExprPtr lhs = additive();
    while (auto op = comparison_op()) {
      ++pos_;
      ExprPtr rhs = additive();
      const Span s = join(lhs->span, rhs->span);
      lhs = make_expr(BinaryExpr{*op, lhs, rhs}, s);
    }
    return lhs;
  }

  ExprPtr additive() {
    ExprPtr lhs = multiplicative();
    while (peek().kind == TokenKind::Plus || peek().kind == TokenKind::Minus) {
      const BinaryOp op = take().kind == TokenKind::Plus ? BinaryOp::Add : BinaryOp::Sub;
      ExprPtr rhs = multiplicative();
      const Span s = join(lhs->span, rhs->span);
      lhs = make_expr(BinaryExpr{op, lhs, rhs}, s);
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    ExprPtr lhs = postfix();
    while (peek().kind == TokenKind::Star || peek().kind == TokenKind::Slash) {
      const BinaryOp op = take().kind == TokenKind::Star ? BinaryOp::Mul : BinaryOp::Div;
      ExprPtr rhs = postfix();
      const Span s = join(lhs->span, rhs->span);
      lhs = make_expr(BinaryExpr{op, lhs, rhs}, s);
    }
    return lhs;
  }

  ExprList arguments(TokenKind close, const char* context) {
    ExprList args;
    if (accept(close)) return args;
    while (true) {
      if (peek().kind == TokenKind::Ident && peek(1).kind == TokenKind::Assign) {
        unexpected("keyword arguments are not supported; pass arguments by position");
      }
      args.push_back(expr());
      if (accept(TokenKind::Comma)) {
        if (accept(close)) return args;
        continue;
      }
      if (peek().kind != close) unexpected(std::string("expected ',' or ") + token_name(close) + " " + context);
      take();
      return args;
    }
  }

  ExprPtr postfix() {
    ExprPtr e = atom();
    while (true) {
      if (peek().kind == TokenKind::LParen) {
        take();
        ExprList args = arguments(TokenKind::RParen, "in call");
        const Span s = join(e->span, toks_[pos_ - 1].span);
        e = make_expr(CallExpr{e, std::move(args)}, s);
      } else if (peek().kind == TokenKind::Dot) {
        take();
        const Token& name = expect(TokenKind::Ident, "after '.'");
        if (peek().kind != TokenKind::LParen) {
          throw SyntaxError(name.span.line, name.span.col,
                            "attribute access '." + name.text + "' is not supported; only method calls are");
        }
        take();
        ExprList args = arguments(TokenKind::RParen, "in method call");
        const Span s = join(e->span, toks_[pos_ - 1].span);
        e = make_expr(MethodCallExpr{e, name.text, std::move(args)}, s);
      } else if (peek().kind == TokenKind::LBracket) {
        take();
        if (peek().kind == TokenKind::RBracket) unexpected("expected an index");
        ExprPtr index = expr();
        const Token& close = expect(TokenKind::RBracket, "after index");
        const Span s = join(e->span, close.span);
        e = make_expr(IndexExpr{e, index}, s);
      } else {
        return e;
      }
    }
  }

  ExprPtr atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Ident: take(); return make_expr(NameExpr{t.text}, t.span);
      case TokenKind::Int: take(); return make_expr(IntLit{t.int_value}, t.span);
      case TokenKind::Real: take(); return make_expr(RealLit{t.real_value}, t.span);
      case TokenKind::String: take(); return make_expr(StringLit{t.text}, t.span);
      case TokenKind::True: take(); return make_expr(BoolLit{true}, t.span);
      case TokenKind::False: take(); return make_expr(BoolLit{false}, t.span);
      case TokenKind::LBracket: {
        const Span open = take().span;
        ExprList items = arguments(TokenKind::RBracket, "in list");
        return make_expr(ListExpr{std::move(items)}, join(open, toks_[pos_ - 1].span));
      }
      case TokenKind::LParen: {
        const Span open = take().span;
        if (peek().kind == TokenKind::RParen) unexpected("tuples are not supported; expected an expression");
        ExprPtr inner = expr();
        if (peek().kind == TokenKind::Comma) unexpected("tuples are not supported");
        const Token& close = expect(TokenKind::RParen, "to close '('");
        // Parentheses only group; the node keeps the span of its contents plus the brackets.
        return std::make_shared<const Expr>(Expr{inner->node, join(open, close.span)});
      }
      case TokenKind::Minus: {
        const Span minus = take().span;
        ExprPtr operand = atom();
        return make_expr(NegExpr{operand}, join(minus, operand->span));
      }
      default: unexpected("expected an expression");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

bool is_fence_line(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return line.substr(i, 3) == "```";
}

}  // namespace

Program parse_program(std::string_view source) { return Parser(tokenize(source)).program(); }

FenceStripResult strip_code_fences(std::string_view text) {
  FenceStripResult out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    const bool last = end == std::string_view::npos;
    if (last) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    if (is_fence_line(line)) {
      out.stripped = true;
    } else {
      out.code.append(line);
      if (!last) out.code.push_back('\n');
    }
    if (last) break;
    start = end + 1;
  }
  return out;
}

}  // namespace eoscript::script
