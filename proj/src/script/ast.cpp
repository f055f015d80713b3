#include "eoscript/script/ast.hpp"

#include <bit>

namespace eoscript::script {

const char* op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::In: return "in";
  }
  return "?";
}

bool is_comparison(BinaryOp op) {
  return op != BinaryOp::Add && op != BinaryOp::Sub && op != BinaryOp::Mul && op != BinaryOp::Div;
}

namespace {

bool same_list(const ExprList& a, const ExprList& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_expr(*a[i], *b[i])) return false;
  }
  return true;
}

struct SameVisitor {
  const Expr::Node& other;

  bool operator()(const NameExpr& a) const { return a.name == std::get<NameExpr>(other).name; }
  bool operator()(const IntLit& a) const { return a.value == std::get<IntLit>(other).value; }
  bool operator()(const RealLit& a) const {
    return std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(std::get<RealLit>(other).value);
  }
  bool operator()(const StringLit& a) const { return a.value == std::get<StringLit>(other).value; }
  bool operator()(const BoolLit& a) const { return a.value == std::get<BoolLit>(other).value; }
  bool operator()(const ListExpr& a) const { return same_list(a.items, std::get<ListExpr>(other).items); }
  bool operator()(const CallExpr& a) const {
    const auto& b = std::get<CallExpr>(other);
    return same_expr(*a.callee, *b.callee) && same_list(a.args, b.args);
  }
  bool operator()(const MethodCallExpr& a) const {
    const auto& b = std::get<MethodCallExpr>(other);
    return a.method == b.method && same_expr(*a.object, *b.object) && same_list(a.args, b.args);
  }
  bool operator()(const IndexExpr& a) const {
    const auto& b = std::get<IndexExpr>(other);
    return same_expr(*a.object, *b.object) && same_expr(*a.index, *b.index);
  }
  bool operator()(const BinaryExpr& a) const {
    const auto& b = std::get<BinaryExpr>(other);
    return a.op == b.op && same_expr(*a.lhs, *b.lhs) && same_expr(*a.rhs, *b.rhs);
  }
  bool operator()(const NegExpr& a) const { return same_expr(*a.operand, *std::get<NegExpr>(other).operand); }
};

}  // namespace

bool same_expr(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(SameVisitor{b.node}, a.node);
}

bool same_program(const Program& a, const Program& b) {
  if (a.statements.size() != b.statements.size()) return false;
  for (std::size_t i = 0; i < a.statements.size(); ++i) {
    const auto& x = a.statements[i].node;
    const auto& y = b.statements[i].node;
    if (x.index() != y.index()) return false;
    if (const auto* ax = std::get_if<AssignStmt>(&x)) {
      const auto& ay = std::get<AssignStmt>(y);
      if (ax->target != ay.target || !same_expr(*ax->value, *ay.value)) return false;
    } else if (!same_expr(*std::get<ExprStmt>(x).expr, *std::get<ExprStmt>(y).expr)) {
      return false;
    }
  }
  return true;
}

}  // namespace eoscript::script
