#pragma once

// Syntax tree of the tool-script dialect. Nodes are immutable and shared.

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace eoscript::script {

// 1-based line/column of the first character and one past the last.
struct Span {
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;
};

enum class BinaryOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, In };

const char* op_text(BinaryOp op);
bool is_comparison(BinaryOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;
using ExprList = std::vector<ExprPtr>;

struct NameExpr {
  std::string name;
};
struct IntLit {
  std::int64_t value;
};
struct RealLit {
  double value;
};
struct StringLit {
  std::string value;
};
struct BoolLit {
  bool value;
};
struct ListExpr {
  ExprList items;
};
struct CallExpr {
  ExprPtr callee;
  ExprList args;
};
struct MethodCallExpr {
  ExprPtr object;
  std::string method;
  ExprList args;
};
struct IndexExpr {
  ExprPtr object;
  ExprPtr index;
};
struct BinaryExpr {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct NegExpr {
  ExprPtr operand;
};

struct Expr {
  using Node = std::variant<NameExpr, IntLit, RealLit, StringLit, BoolLit, ListExpr, CallExpr, MethodCallExpr,
                            IndexExpr, BinaryExpr, NegExpr>;
  Node node;
  Span span;
};

template <typename T>
ExprPtr make_expr(T node, Span span = {}) {
  return std::make_shared<const Expr>(Expr{Expr::Node(std::move(node)), span});
}

struct AssignStmt {
  std::string target;
  Span target_span;
  ExprPtr value;
};
struct ExprStmt {
  ExprPtr expr;
};

struct Stmt {
  std::variant<AssignStmt, ExprStmt> node;
  Span span;
};

struct Program {
  std::vector<Stmt> statements;
};

// Structural equality; spans are ignored. Reals compare bitwise.
bool same_expr(const Expr& a, const Expr& b);
bool same_program(const Program& a, const Program& b);

}  // namespace eoscript::script
