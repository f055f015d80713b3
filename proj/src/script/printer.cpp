#include "eoscript/script/printer.hpp"

#include <cstdio>

#include "eoscript/value.hpp"

namespace eoscript::script {

namespace {

constexpr int kCmp = 1;
constexpr int kAdd = 2;
constexpr int kMul = 3;
constexpr int kPost = 4;
constexpr int kAtom = 5;

int op_level(BinaryOp op) {
  if (is_comparison(op)) return kCmp;
  return op == BinaryOp::Add || op == BinaryOp::Sub ? kAdd : kMul;
}

int level(const Expr& e) {
  if (const auto* b = std::get_if<BinaryExpr>(&e.node)) return op_level(b->op);
  if (std::holds_alternative<CallExpr>(e.node) || std::holds_alternative<MethodCallExpr>(e.node) ||
      std::holds_alternative<IndexExpr>(e.node)) {
    return kPost;
  }
  return kAtom;
}

void emit(const Expr& e, int min_level, std::string& out);

void emit_list(const ExprList& items, std::string& out) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    emit(*items[i], kCmp, out);
  }
}

struct Emitter {
  std::string& out;

  void operator()(const NameExpr& n) const { out += n.name; }
  void operator()(const IntLit& n) const { out += std::to_string(n.value); }
  void operator()(const RealLit& n) const { out += format_real(n.value); }
  void operator()(const StringLit& n) const { out += quote_string(n.value); }
  void operator()(const BoolLit& n) const { out += n.value ? "True" : "False"; }
  void operator()(const ListExpr& n) const {
    out += '[';
    emit_list(n.items, out);
    out += ']';
  }
  void operator()(const CallExpr& n) const {
    emit(*n.callee, kPost, out);
    out += '(';
    emit_list(n.args, out);
    out += ')';
  }
  void operator()(const MethodCallExpr& n) const {
    emit(*n.object, kPost, out);
    out += '.';
    out += n.method;
    out += '(';
    emit_list(n.args, out);
    out += ')';
  }
  void operator()(const IndexExpr& n) const {
    emit(*n.object, kPost, out);
    out += '[';
    emit(*n.index, kCmp, out);
    out += ']';
  }
  void operator()(const BinaryExpr& n) const {
    const int lvl = op_level(n.op);
    emit(*n.lhs, lvl, out);
    out += ' ';
    out += op_text(n.op);
    out += ' ';
    emit(*n.rhs, lvl + 1, out);
  }
  void operator()(const NegExpr& n) const {
    out += '-';
    emit(*n.operand, kAtom, out);
  }
};

void emit(const Expr& e, int min_level, std::string& out) {
  const bool wrap = level(e) < min_level;
  if (wrap) out += '(';
  std::visit(Emitter{out}, e.node);
  if (wrap) out += ')';
}

}  // namespace

std::string quote_string(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) {
          char buf[5];
          std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

std::string print_expr(const Expr& expr) {
  std::string out;
  emit(expr, kCmp, out);
  return out;
}

std::string print_program(const Program& program) {
  std::string out;
  for (const auto& stmt : program.statements) {
    if (const auto* a = std::get_if<AssignStmt>(&stmt.node)) {
      out += a->target + " = " + print_expr(*a->value);
    } else {
      out += print_expr(*std::get<ExprStmt>(stmt.node).expr);
    }
    out += '\n';
  }
  return out;
}

}  // namespace eoscript::script
