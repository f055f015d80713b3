#include "eoscript/script/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "eoscript/script/validator.hpp"

namespace eoscript::script {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NameError: return "NameError";
    case ErrorKind::TypeError: return "TypeError";
    case ErrorKind::ValueError: return "ValueError";
    case ErrorKind::IndexError: return "IndexError";
    case ErrorKind::ZeroDivisionError: return "ZeroDivisionError";
    case ErrorKind::ResourceLimit: return "ResourceLimit";
    case ErrorKind::ToolError: return "ToolError";
  }
  return "Error";
}

ScriptError::ScriptError(ErrorKind kind, Span span, const std::string& message, std::string detail)
    : std::runtime_error(message), kind_(kind), span_(span), detail_(std::move(detail)) {}

namespace {

using T = Value::Type;
using Clock = std::chrono::steady_clock;

bool intlike(const Value& v) { return v.is(T::Int) || v.is(T::Bool); }
bool numeric(const Value& v) { return v.is_number() || v.is(T::Bool); }
std::int64_t as_intlike(const Value& v) { return v.is(T::Bool) ? (v.as_bool() ? 1 : 0) : v.as_int(); }
double as_double(const Value& v) { return v.is(T::Bool) ? (v.as_bool() ? 1.0 : 0.0) : v.as_number(); }

std::string tname(const Value& v) {
  if (v.is(T::Mask)) return v.as_mask().is_boolean() ? "bool mask" : "mask";
  return type_name(v.type());
}

// Python-style equality: numbers compare by value across int, real and bool.
bool py_equal(const Value& a, const Value& b) {
  if (numeric(a) && numeric(b)) {
    if (intlike(a) && intlike(b)) return as_intlike(a) == as_intlike(b);
    return as_double(a) == as_double(b);
  }
  if (a.is(T::List) && b.is(T::List)) {
    const auto& x = a.as_list();
    const auto& y = b.as_list();
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!py_equal(x[i], y[i])) return false;
    }
    return true;
  }
  return a == b;
}

BinaryOp mirror(BinaryOp op) {
  switch (op) {
    case BinaryOp::Lt: return BinaryOp::Gt;
    case BinaryOp::Le: return BinaryOp::Ge;
    case BinaryOp::Gt: return BinaryOp::Lt;
    case BinaryOp::Ge: return BinaryOp::Le;
    default: return op;
  }
}

template <typename A, typename B>
bool compare(BinaryOp op, const A& a, const B& b) {
  switch (op) {
    case BinaryOp::Eq: return a == b;
    case BinaryOp::Ne: return a != b;
    case BinaryOp::Lt: return a < b;
    case BinaryOp::Le: return a <= b;
    case BinaryOp::Gt: return a > b;
    case BinaryOp::Ge: return a >= b;
    default: return false;
  }
}

class Interpreter {
 public:
  Interpreter(const Registry& reg, const ExecutionContext& ctx, ExecutionResult& result)
      : reg_(reg), limits_(ctx.limits), result_(result), start_(Clock::now()) {
    tool_ctx_.attachments = ctx.attachments;
    tool_ctx_.scratch_dir = ctx.scratch_dir;
    tool_ctx_.artifact_dir = ctx.artifact_dir;
    tool_ctx_.artifacts = &result_.artifacts;
    tool_ctx_.scenes = ctx.scenes;
    tool_ctx_.deadline = start_ + limits_.wall_clock;
  }

  void run(const Program& program) {
    for (const auto& stmt : program.statements) {
      step(stmt.span);
      if (const auto* a = std::get_if<AssignStmt>(&stmt.node)) {
        Value v = eval(*a->value);
        env_[a->target] = std::move(v);
        account(stmt.span, 0);
      } else {
        const Value v = eval(*std::get<ExprStmt>(stmt.node).expr);
        account(stmt.span, v.byte_size());
      }
    }
  }

  std::uint64_t steps() const { return steps_; }
  std::size_t peak() const { return peak_bytes_; }

 private:
  [[noreturn]] static void fail(ErrorKind kind, const Span& span, const std::string& msg, std::string detail = {}) {
    throw ScriptError(kind, span, msg, std::move(detail));
  }

  void check_clock(const Span& span) {
    if (Clock::now() - start_ > limits_.wall_clock) {
      fail(ErrorKind::ResourceLimit, span,
           "ResourceLimit(wall_clock): run exceeded " + std::to_string(limits_.wall_clock.count()) + " ms",
           kLimitWallClock);
    }
  }

  void step(const Span& span, std::uint64_t n = 1) {
    steps_ += n;
    if (steps_ > limits_.max_steps) {
      fail(ErrorKind::ResourceLimit, span,
           "ResourceLimit(steps): more than " + std::to_string(limits_.max_steps) + " evaluation steps", kLimitSteps);
    }
    check_clock(span);
  }

  std::size_t store_bytes() const {
    std::size_t total = 0;
    for (const auto& [name, v] : env_) total += v.byte_size();
    return total;
  }

  // Records the store size with `extra` live bytes; fails past the limit.
  void account(const Span& span, std::size_t extra) {
    const std::size_t total = store_bytes() + extra;
    peak_bytes_ = std::max(peak_bytes_, total);
    if (total > limits_.max_value_store_bytes) store_overflow(span, total);
  }

  [[noreturn]] void store_overflow(const Span& span, double bytes) const {
    fail(ErrorKind::ResourceLimit, span,
         "ResourceLimit(value_store): " + std::to_string(static_cast<unsigned long long>(std::ceil(bytes / 1048576.0))) +
             " MiB needed, limit " + std::to_string(limits_.max_value_store_bytes >> 20) + " MiB",
         kLimitValueStore);
  }

  // Rejects an allocation before it happens.
  void precharge(const Span& span, double projected_bytes) {
    const double total = static_cast<double>(store_bytes()) + projected_bytes;
    if (total > static_cast<double>(limits_.max_value_store_bytes)) store_overflow(span, total);
  }

  std::int64_t checked(const Span& span, bool overflow, std::int64_t v) {
    if (overflow) fail(ErrorKind::ValueError, span, "ValueError: integer overflow");
    return v;
  }

  Value eval(const Expr& e) {
    step(e.span);
    return std::visit([&](const auto& node) { return eval_node(e, node); }, e.node);
  }

  Value eval_node(const Expr& e, const NameExpr& n) {
    auto it = env_.find(n.name);
    if (it == env_.end()) fail(ErrorKind::NameError, e.span, "NameError: name '" + n.name + "' is not defined");
    return it->second;
  }
  Value eval_node(const Expr&, const IntLit& n) { return Value::integer(n.value); }
  Value eval_node(const Expr&, const RealLit& n) { return Value::real(n.value); }
  Value eval_node(const Expr&, const StringLit& n) { return Value::string(n.value); }
  Value eval_node(const Expr&, const BoolLit& n) { return Value::boolean(n.value); }

  Value eval_node(const Expr&, const ListExpr& n) {
    ValueList items;
    items.reserve(n.items.size());
    for (const auto& item : n.items) items.push_back(eval(*item));
    return Value::list(std::move(items));
  }

  Value eval_node(const Expr& e, const NegExpr& n) {
    const Value v = eval(*n.operand);
    if (intlike(v)) {
      const auto x = as_intlike(v);
      if (x == std::numeric_limits<std::int64_t>::min()) fail(ErrorKind::ValueError, e.span, "ValueError: integer overflow");
      return Value::integer(-x);
    }
    if (v.is(T::Real)) return Value::real(-v.as_real());
    fail(ErrorKind::TypeError, e.span, "TypeError: bad operand type for unary -: '" + tname(v) + "'");
  }

  Value eval_node(const Expr& e, const IndexExpr& n) {
    const Value obj = eval(*n.object);
    const Value idx = eval(*n.index);
    if (!intlike(idx)) fail(ErrorKind::TypeError, e.span, "TypeError: indices must be integers, not " + tname(idx));
    std::int64_t i = as_intlike(idx);
    std::size_t size = 0;
    if (obj.is(T::List)) {
      size = obj.as_list().size();
    } else if (obj.is(T::String)) {
      size = obj.as_string().size();
    } else {
      fail(ErrorKind::TypeError, e.span, "TypeError: '" + tname(obj) + "' object is not subscriptable");
    }
    if (i < 0) i += static_cast<std::int64_t>(size);
    if (i < 0 || static_cast<std::size_t>(i) >= size) {
      fail(ErrorKind::IndexError, e.span, "IndexError: index " + std::to_string(as_intlike(idx)) + " out of range");
    }
    if (obj.is(T::List)) return obj.as_list()[static_cast<std::size_t>(i)];
    return Value::string(std::string(1, obj.as_string()[static_cast<std::size_t>(i)]));
  }

  Value eval_node(const Expr& e, const BinaryExpr& n) {
    const Value a = eval(*n.lhs);
    const Value b = eval(*n.rhs);
    switch (n.op) {
      case BinaryOp::Add: return add(e.span, a, b);
      case BinaryOp::Sub: return arith(e.span, n.op, a, b);
      case BinaryOp::Mul: return mul(e.span, a, b);
      case BinaryOp::Div: return arith(e.span, n.op, a, b);
      case BinaryOp::In: return contains(e.span, a, b);
      default: return compare_values(e.span, n.op, a, b);
    }
  }

  [[noreturn]] void bad_operands(const Span& span, BinaryOp op, const Value& a, const Value& b) {
    fail(ErrorKind::TypeError, span,
         std::string("TypeError: unsupported operand types for ") + op_text(op) + ": '" + tname(a) + "' and '" +
             tname(b) + "'");
  }

  Value arith(const Span& span, BinaryOp op, const Value& a, const Value& b) {
    if (!numeric(a) || !numeric(b)) bad_operands(span, op, a, b);
    if (op == BinaryOp::Div) {
      if (as_double(b) == 0.0) fail(ErrorKind::ZeroDivisionError, span, "ZeroDivisionError: division by zero");
      return Value::real(as_double(a) / as_double(b));
    }
    if (intlike(a) && intlike(b)) {
      std::int64_t r = 0;
      const bool ovf = op == BinaryOp::Sub ? __builtin_sub_overflow(as_intlike(a), as_intlike(b), &r)
                                           : __builtin_add_overflow(as_intlike(a), as_intlike(b), &r);
      return Value::integer(checked(span, ovf, r));
    }
    return Value::real(op == BinaryOp::Sub ? as_double(a) - as_double(b) : as_double(a) + as_double(b));
  }

  Value add(const Span& span, const Value& a, const Value& b) {
    if (a.is(T::String) && b.is(T::String)) {
      precharge(span, static_cast<double>(a.as_string().size() + b.as_string().size()));
      return Value::string(a.as_string() + b.as_string());
    }
    if (a.is(T::List) && b.is(T::List)) {
      precharge(span, static_cast<double>(a.byte_size() + b.byte_size()));
      step(span, a.as_list().size() + b.as_list().size());
      ValueList items = a.as_list();
      items.insert(items.end(), b.as_list().begin(), b.as_list().end());
      return Value::list(std::move(items));
    }
    return arith(span, BinaryOp::Add, a, b);
  }

  Value repeat(const Span& span, const Value& seq, std::int64_t times) {
    const std::size_t n = times > 0 ? static_cast<std::size_t>(times) : 0;
    if (seq.is(T::String)) {
      precharge(span, static_cast<double>(seq.as_string().size()) * static_cast<double>(n));
      std::string out;
      out.reserve(seq.as_string().size() * n);
      for (std::size_t i = 0; i < n; ++i) out += seq.as_string();
      return Value::string(std::move(out));
    }
    const auto& items = seq.as_list();
    precharge(span, static_cast<double>(seq.byte_size()) * static_cast<double>(n));
    step(span, static_cast<std::uint64_t>(items.size()) * n);
    ValueList out;
    out.reserve(items.size() * n);
    for (std::size_t i = 0; i < n; ++i) out.insert(out.end(), items.begin(), items.end());
    return Value::list(std::move(out));
  }

  Value mul(const Span& span, const Value& a, const Value& b) {
    const bool a_seq = a.is(T::List) || a.is(T::String);
    const bool b_seq = b.is(T::List) || b.is(T::String);
    if (a_seq && intlike(b)) return repeat(span, a, as_intlike(b));
    if (b_seq && intlike(a)) return repeat(span, b, as_intlike(a));
    if (!numeric(a) || !numeric(b)) bad_operands(span, BinaryOp::Mul, a, b);
    if (intlike(a) && intlike(b)) {
      std::int64_t r = 0;
      const bool ovf = __builtin_mul_overflow(as_intlike(a), as_intlike(b), &r);
      return Value::integer(checked(span, ovf, r));
    }
    return Value::real(as_double(a) * as_double(b));
  }

  Mask compare_mask(const Mask& m, BinaryOp op, double k) {
    std::vector<std::int32_t> out(m.pixel_count());
    const auto& v = m.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = compare(op, static_cast<double>(v[i]), k) ? 1 : 0;
    return Mask(m.width(), m.height(), std::move(out), true, std::nullopt, m.georef());
  }

  Mask compare_raster(const Span& span, const Raster& r, BinaryOp op, double k) {
    if (r.band_count() != 1) {
      fail(ErrorKind::TypeError, span,
           "TypeError: comparison needs a single-band raster, got " + std::to_string(r.band_count()) + " bands");
    }
    const auto& plane = r.band(0);
    std::vector<std::int32_t> out(plane.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = !r.is_nodata(plane[i]) && compare(op, static_cast<double>(plane[i]), k) ? 1 : 0;
    }
    return Mask(r.width(), r.height(), std::move(out), true, std::nullopt, Georef{r.geotransform(), r.crs()});
  }

  Value compare_values(const Span& span, BinaryOp op, const Value& a, const Value& b) {
    if ((a.is(T::Mask) || a.is(T::Raster)) && numeric(b)) {
      return a.is(T::Mask) ? Value::mask(compare_mask(a.as_mask(), op, as_double(b)))
                           : Value::mask(compare_raster(span, a.as_raster(), op, as_double(b)));
    }
    if ((b.is(T::Mask) || b.is(T::Raster)) && numeric(a)) return compare_values(span, mirror(op), b, a);
    if (op == BinaryOp::Eq) return Value::boolean(py_equal(a, b));
    if (op == BinaryOp::Ne) return Value::boolean(!py_equal(a, b));
    if (numeric(a) && numeric(b)) {
      if (intlike(a) && intlike(b)) return Value::boolean(compare(op, as_intlike(a), as_intlike(b)));
      return Value::boolean(compare(op, as_double(a), as_double(b)));
    }
    if (a.is(T::String) && b.is(T::String)) return Value::boolean(compare(op, a.as_string(), b.as_string()));
    fail(ErrorKind::TypeError, span,
         std::string("TypeError: '") + op_text(op) + "' not supported between '" + tname(a) + "' and '" + tname(b) +
             "'");
  }

  Value contains(const Span& span, const Value& needle, const Value& hay) {
    if (hay.is(T::Mask)) {
      if (!numeric(needle)) fail(ErrorKind::TypeError, span, "TypeError: mask membership needs a number");
      const double k = as_double(needle);
      if (k != std::floor(k) || std::abs(k) > 2147483647.0) return Value::boolean(false);
      return Value::boolean(hay.as_mask().contains(static_cast<std::int32_t>(k)));
    }
    if (hay.is(T::List)) {
      step(span, hay.as_list().size());
      for (const auto& item : hay.as_list()) {
        if (py_equal(needle, item)) return Value::boolean(true);
      }
      return Value::boolean(false);
    }
    if (hay.is(T::String)) {
      if (!needle.is(T::String)) fail(ErrorKind::TypeError, span, "TypeError: 'in <string>' requires a string");
      return Value::boolean(hay.as_string().find(needle.as_string()) != std::string::npos);
    }
    fail(ErrorKind::TypeError, span, "TypeError: argument of type '" + tname(hay) + "' is not iterable");
  }

  Value eval_node(const Expr& e, const MethodCallExpr& n) {
    const Value obj = eval(*n.object);
    ValueList args;
    for (const auto& a : n.args) args.push_back(eval(*a));
    if (!is_permitted_method(n.method)) {
      fail(ErrorKind::TypeError, e.span, "TypeError: method '" + n.method + "' is not available");
    }
    const std::size_t want = n.method == "count" ? 1 : 0;
    if (args.size() != want) {
      fail(ErrorKind::TypeError, e.span,
           "TypeError: ." + n.method + "() takes " + std::to_string(want) + " argument(s), got " +
               std::to_string(args.size()));
    }
    if (n.method == "sum") return sum(e.span, obj);
    if (n.method == "mean") return mean(e.span, obj);
    return count(e.span, obj, args[0]);
  }

  const BandPlane& single_band(const Span& span, const Raster& r, const char* method) {
    if (r.band_count() != 1) {
      fail(ErrorKind::TypeError, span, std::string("TypeError: .") + method + "() needs a single-band raster");
    }
    return r.band(0);
  }

  Value sum(const Span& span, const Value& obj) {
    if (obj.is(T::Mask)) {
      std::int64_t total = 0;
      for (auto v : obj.as_mask().values()) total += v;
      return Value::integer(total);
    }
    if (obj.is(T::Raster)) {
      const auto& r = obj.as_raster();
      double total = 0.0;
      for (float v : single_band(span, r, "sum")) {
        if (!r.is_nodata(v)) total += v;
      }
      return Value::real(total);
    }
    if (obj.is(T::List)) {
      const auto& items = obj.as_list();
      step(span, items.size());
      bool all_int = true;
      for (const auto& v : items) {
        if (!numeric(v)) fail(ErrorKind::TypeError, span, "TypeError: .sum() of a list holding " + tname(v));
        all_int = all_int && intlike(v);
      }
      if (all_int) {
        std::int64_t total = 0;
        for (const auto& v : items) {
          const bool ovf = __builtin_add_overflow(total, as_intlike(v), &total);
          total = checked(span, ovf, total);
        }
        return Value::integer(total);
      }
      double total = 0.0;
      for (const auto& v : items) total += as_double(v);
      return Value::real(total);
    }
    fail(ErrorKind::TypeError, span, "TypeError: '" + tname(obj) + "' has no .sum()");
  }

  Value mean(const Span& span, const Value& obj) {
    if (obj.is(T::Mask)) {
      const auto& m = obj.as_mask();
      double total = 0.0;
      for (auto v : m.values()) total += v;
      return Value::real(total / static_cast<double>(m.pixel_count()));
    }
    if (obj.is(T::Raster)) {
      const auto& r = obj.as_raster();
      double total = 0.0;
      std::size_t n = 0;
      for (float v : single_band(span, r, "mean")) {
        if (!r.is_nodata(v)) {
          total += v;
          ++n;
        }
      }
      if (n == 0) fail(ErrorKind::ValueError, span, "ValueError: mean of a raster with no valid pixels");
      return Value::real(total / static_cast<double>(n));
    }
    if (obj.is(T::List)) {
      const auto& items = obj.as_list();
      if (items.empty()) fail(ErrorKind::ValueError, span, "ValueError: mean of an empty list");
      step(span, items.size());
      double total = 0.0;
      for (const auto& v : items) {
        if (!numeric(v)) fail(ErrorKind::TypeError, span, "TypeError: .mean() of a list holding " + tname(v));
        total += as_double(v);
      }
      return Value::real(total / static_cast<double>(items.size()));
    }
    fail(ErrorKind::TypeError, span, "TypeError: '" + tname(obj) + "' has no .mean()");
  }

  Value count(const Span& span, const Value& obj, const Value& what) {
    if (obj.is(T::Mask)) {
      if (!numeric(what)) fail(ErrorKind::TypeError, span, "TypeError: mask .count() needs a number");
      const double k = as_double(what);
      std::int64_t n = 0;
      for (auto v : obj.as_mask().values()) n += static_cast<double>(v) == k ? 1 : 0;
      return Value::integer(n);
    }
    if (obj.is(T::List)) {
      step(span, obj.as_list().size());
      std::int64_t n = 0;
      for (const auto& v : obj.as_list()) n += py_equal(v, what) ? 1 : 0;
      return Value::integer(n);
    }
    if (obj.is(T::String)) {
      if (!what.is(T::String)) fail(ErrorKind::TypeError, span, "TypeError: string .count() needs a string");
      const auto& s = obj.as_string();
      const auto& sub = what.as_string();
      if (sub.empty()) return Value::integer(static_cast<std::int64_t>(s.size() + 1));
      std::int64_t n = 0;
      for (std::size_t pos = s.find(sub); pos != std::string::npos; pos = s.find(sub, pos + sub.size())) ++n;
      return Value::integer(n);
    }
    fail(ErrorKind::TypeError, span, "TypeError: '" + tname(obj) + "' has no .count()");
  }

  Value eval_node(const Expr& e, const CallExpr& n) {
    const auto* callee = std::get_if<NameExpr>(&n.callee->node);
    if (!callee) fail(ErrorKind::TypeError, e.span, "TypeError: call target must be a name");
    if (env_.contains(callee->name)) {
      fail(ErrorKind::TypeError, e.span, "TypeError: '" + callee->name + "' is a variable and cannot be called");
    }
    ValueList args;
    args.reserve(n.args.size());
    for (const auto& a : n.args) args.push_back(eval(*a));
    if (is_builtin_function(callee->name)) return builtin(e.span, callee->name, args);
    return call_tool(e.span, callee->name, args);
  }

  Value call_tool(const Span& span, const std::string& name, const ValueList& args) {
    if (result_.tool_calls.size() >= limits_.max_tool_calls) {
      fail(ErrorKind::ResourceLimit, span,
           "ResourceLimit(tool_calls): more than " + std::to_string(limits_.max_tool_calls) + " tool calls",
           kLimitToolCalls);
    }
    check_clock(span);
    try {
      return invoke_tool(reg_, name, args, tool_ctx_, result_.tool_calls);
    } catch (const ToolError& err) {
      if (err.code() == ToolErrc::ToolTimeout && Clock::now() >= tool_ctx_.deadline) {
        fail(ErrorKind::ResourceLimit, span,
             "ResourceLimit(wall_clock): run exceeded " + std::to_string(limits_.wall_clock.count()) +
                 " ms while waiting for " + name,
             kLimitWallClock);
      }
      fail(ErrorKind::ToolError, span, err.what(), std::string(to_string(err.code())));
    }
  }

  Value builtin(const Span& span, const std::string& name, const ValueList& args) {
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (args.size() < lo || args.size() > hi) {
        fail(ErrorKind::TypeError, span,
             "TypeError: " + name + "() takes " + std::to_string(lo) + (hi != lo ? "-" + std::to_string(hi) : "") +
                 " argument(s), got " + std::to_string(args.size()));
      }
    };
    if (name == "print") {
      std::string line;
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) line += ' ';
        line += to_display(args[i]);
      }
      result_.output.push_back(std::move(line));
      return Value::none();
    }
    if (name == "len") {
      arity(1, 1);
      if (args[0].is(T::List)) return Value::integer(static_cast<std::int64_t>(args[0].as_list().size()));
      if (args[0].is(T::String)) return Value::integer(static_cast<std::int64_t>(args[0].as_string().size()));
      fail(ErrorKind::TypeError, span, "TypeError: object of type '" + tname(args[0]) + "' has no len()");
    }
    if (name == "abs") {
      arity(1, 1);
      const Value& v = args[0];
      if (intlike(v)) {
        const auto x = as_intlike(v);
        if (x == std::numeric_limits<std::int64_t>::min()) fail(ErrorKind::ValueError, span, "ValueError: integer overflow");
        return Value::integer(x < 0 ? -x : x);
      }
      if (v.is(T::Real)) return Value::real(std::fabs(v.as_real()));
      fail(ErrorKind::TypeError, span, "TypeError: bad operand type for abs(): '" + tname(v) + "'");
    }
    // round
    arity(1, 2);
    const Value& v = args[0];
    if (!numeric(v)) fail(ErrorKind::TypeError, span, "TypeError: type " + tname(v) + " doesn't define round()");
    if (args.size() == 2 && !intlike(args[1])) {
      fail(ErrorKind::TypeError, span, "TypeError: round() digits must be an integer");
    }
    if (intlike(v)) return Value::integer(as_intlike(v));
    const double x = v.as_real();
    if (!std::isfinite(x)) fail(ErrorKind::ValueError, span, "ValueError: cannot round " + format_real(x));
    if (args.size() == 1) {
      const double r = std::nearbyint(x);
      if (std::fabs(r) >= 9.2e18) fail(ErrorKind::ValueError, span, "ValueError: integer overflow");
      return Value::integer(static_cast<std::int64_t>(r));
    }
    const auto digits = std::clamp<std::int64_t>(as_intlike(args[1]), -308, 308);
    const double scale = std::pow(10.0, static_cast<double>(digits));
    const double scaled = x * scale;
    if (!std::isfinite(scaled)) return Value::real(x);
    return Value::real(std::nearbyint(scaled) / scale);
  }

  const Registry& reg_;
  Limits limits_;
  ExecutionResult& result_;
  Clock::time_point start_;
  ToolContext tool_ctx_;
  std::map<std::string, Value, std::less<>> env_;
  std::uint64_t steps_ = 0;
  std::size_t peak_bytes_ = 0;
};

}  // namespace

ExecutionResult execute_program(const Program& program, const Registry& registry, const ExecutionContext& ctx) {
  ExecutionResult result;
  const auto t0 = Clock::now();
  Interpreter interp(registry, ctx, result);
  try {
    interp.run(program);
    result.success = true;
  } catch (const ScriptError& e) {
    result.error = e;
  } catch (const std::bad_alloc&) {
    result.error = ScriptError(ErrorKind::ResourceLimit, Span{}, "ResourceLimit(value_store): out of memory",
                               kLimitValueStore);
  }
  result.resources.steps = interp.steps();
  result.resources.peak_value_store_bytes = interp.peak();
  result.resources.tool_calls = result.tool_calls.size();
  result.resources.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
  return result;
}

}  // namespace eoscript::script
