#include "eoscript/script/validator.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "eoscript/script/parser.hpp"

namespace eoscript::script {

bool is_builtin_function(std::string_view name) {
  return std::find(std::begin(kBuiltinFunctions), std::end(kBuiltinFunctions), name) != std::end(kBuiltinFunctions);
}

bool is_permitted_method(std::string_view name) {
  return std::find(std::begin(kPermittedMethods), std::end(kPermittedMethods), name) != std::end(kPermittedMethods);
}

namespace {

struct Arity {
  std::size_t min;
  std::optional<std::size_t> max;
};

Arity builtin_arity(std::string_view name) {
  if (name == "print") return {0, std::nullopt};
  if (name == "round") return {1, 2};
  return {1, 1};
}

std::string arity_text(const Arity& a) {
  if (!a.max) return "at least " + std::to_string(a.min);
  if (*a.max == a.min) return std::to_string(a.min);
  return std::to_string(a.min) + " to " + std::to_string(*a.max);
}

// A representative value for literal arguments, used for schema type checks.
std::optional<Value> literal_value(const Expr& e) {
  if (std::holds_alternative<IntLit>(e.node)) return Value::integer(0);
  if (std::holds_alternative<RealLit>(e.node)) return Value::real(0.0);
  if (std::holds_alternative<StringLit>(e.node)) return Value::string("");
  if (std::holds_alternative<BoolLit>(e.node)) return Value::boolean(false);
  if (std::holds_alternative<ListExpr>(e.node)) return Value::list({});
  if (const auto* n = std::get_if<NegExpr>(&e.node)) {
    if (std::holds_alternative<IntLit>(n->operand->node)) return Value::integer(0);
    if (std::holds_alternative<RealLit>(n->operand->node)) return Value::real(0.0);
  }
  return std::nullopt;
}

class Checker {
 public:
  explicit Checker(const Registry& reg) : reg_(reg) {}

  std::vector<Diagnostic> run(const Program& program) {
    for (const auto& stmt : program.statements) {
      if (const auto* a = std::get_if<AssignStmt>(&stmt.node)) {
        visit(*a->value);
        if (is_builtin_function(a->target) || reg_.contains(a->target)) {
          report(a->target_span, "assignment to '" + a->target + "' shadows a tool or builtin");
        }
        defined_.insert(a->target);
      } else {
        visit(*std::get<ExprStmt>(stmt.node).expr);
      }
    }
    return std::move(diags_);
  }

 private:
  void report(const Span& span, std::string message) { diags_.push_back({span, std::move(message)}); }

  void check_arity(const Span& span, const std::string& what, std::size_t n, const Arity& arity) {
    if (n < arity.min || (arity.max && n > *arity.max)) {
      report(span, what + " takes " + arity_text(arity) + " argument(s), got " + std::to_string(n));
    }
  }

  void visit_all(const ExprList& items) {
    for (const auto& e : items) visit(*e);
  }

  void call(const Expr& e, const CallExpr& c) {
    const auto* callee = std::get_if<NameExpr>(&c.callee->node);
    if (!callee) {
      report(c.callee->span, "call target must be a tool or builtin name");
      visit(*c.callee);
    } else if (defined_.contains(callee->name)) {
      report(c.callee->span, "'" + callee->name + "' is a variable, not a tool");
    } else if (is_builtin_function(callee->name)) {
      check_arity(e.span, callee->name + "()", c.args.size(), builtin_arity(callee->name));
    } else if (const ToolSpec* spec = reg_.find(callee->name)) {
      if (spec->signature) {
        check_arity(e.span, callee->name + "()", c.args.size(),
                    Arity{spec->signature->min_arity(), spec->signature->max_arity()});
        const auto& params = spec->signature->args;
        for (std::size_t i = 0; i < c.args.size() && !params.empty(); ++i) {
          const ArgSpec& p = i < params.size() ? params[i] : params.back();
          if (i >= params.size() && !spec->signature->variadic) break;
          if (auto lit = literal_value(*c.args[i]); lit && !arg_type_accepts(p.type, *lit)) {
            report(c.args[i]->span, callee->name + "() argument '" + p.name + "' must be " + to_string(p.type) +
                                        ", got " + type_name(lit->type()));
          }
        }
      }
    } else {
      report(c.callee->span, "unknown tool '" + callee->name + "'");
    }
    visit_all(c.args);
  }

  void visit(const Expr& e) {
    if (const auto* n = std::get_if<NameExpr>(&e.node)) {
      if (defined_.contains(n->name)) return;
      if (is_builtin_function(n->name) || reg_.contains(n->name)) {
        report(e.span, "'" + n->name + "' must be called");
      } else {
        report(e.span, "undefined name '" + n->name + "'");
      }
    } else if (const auto* l = std::get_if<ListExpr>(&e.node)) {
      visit_all(l->items);
    } else if (const auto* c = std::get_if<CallExpr>(&e.node)) {
      call(e, *c);
    } else if (const auto* m = std::get_if<MethodCallExpr>(&e.node)) {
      visit(*m->object);
      if (!is_permitted_method(m->method)) {
        report(e.span, "unsupported method '." + m->method + "()'");
      } else {
        check_arity(e.span, "." + m->method + "()", m->args.size(), Arity{m->method == "count" ? 1U : 0U,
                                                                          m->method == "count" ? 1U : 0U});
      }
      visit_all(m->args);
    } else if (const auto* i = std::get_if<IndexExpr>(&e.node)) {
      visit(*i->object);
      visit(*i->index);
    } else if (const auto* b = std::get_if<BinaryExpr>(&e.node)) {
      visit(*b->lhs);
      visit(*b->rhs);
    } else if (const auto* neg = std::get_if<NegExpr>(&e.node)) {
      visit(*neg->operand);
    }
  }

  const Registry& reg_;
  std::set<std::string, std::less<>> defined_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

Verdict validate_calls(const Program& program, const Registry& registry) {
  Verdict v;
  v.syntactically_valid = true;
  v.diagnostics = Checker(registry).run(program);
  if (program.statements.empty()) v.diagnostics.push_back({Span{1, 1, 1, 1}, "script contains no statements"});
  v.calls_valid = v.diagnostics.empty();
  return v;
}

Verdict check_source(std::string_view source, const Registry& registry) {
  try {
    return validate_calls(parse_program(source), registry);
  } catch (const SyntaxError& e) {
    Verdict v;
    v.diagnostics.push_back({Span{e.line(), e.col(), e.line(), e.col()}, "SyntaxError: " + e.detail()});
    return v;
  }
}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) {
    out += std::to_string(d.span.line) + ":" + std::to_string(d.span.col) + ": " + d.message + "\n";
  }
  return out;
}

}  // namespace eoscript::script
