#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "emsim/layoutlang.hpp"

namespace emsim::layout {

std::string_view to_string(RuntimeFault f) {
  switch (f) {
    case RuntimeFault::DivisionByZero: return "DivisionByZero";
    case RuntimeFault::NonFinite: return "NonFinite";
    case RuntimeFault::BudgetExceeded: return "BudgetExceeded";
    case RuntimeFault::TypeMismatch: return "TypeMismatch";
    case RuntimeFault::UndefinedVariable: return "UndefinedVariable";
    case RuntimeFault::LoopTooLong: return "LoopTooLong";
  }
  return "Unknown";
}

LayoutRuntimeError::LayoutRuntimeError(RuntimeFault fault, SourceLoc loc, const std::string& detail)
    : Error("LayoutRuntimeError",
            std::string(to_string(fault)) + " at " + std::to_string(loc.line) + ":" +
                std::to_string(loc.column) + ": " + detail),
      fault_(fault),
      loc_(loc) {}

namespace {

struct Value {
  enum class Tag { Real, Integer, Point };
  Tag tag = Tag::Real;
  double real = 0.0;
  std::int64_t integer = 0;
  Point2 point;

  static Value of_real(double v) { return {Tag::Real, v, 0, {}}; }
  static Value of_int(std::int64_t v) { return {Tag::Integer, 0.0, v, {}}; }
  static Value of_point(Point2 p) { return {Tag::Point, 0.0, 0, p}; }

  bool numeric() const { return tag != Tag::Point; }
  double as_double() const { return tag == Tag::Integer ? static_cast<double>(integer) : real; }
};

const char* tag_name(Value::Tag t) {
  switch (t) {
    case Value::Tag::Real: return "real";
    case Value::Tag::Integer: return "integer";
    case Value::Tag::Point: return "point";
  }
  return "?";
}

class Interpreter {
 public:
  explicit Interpreter(std::int64_t budget) : budget_(budget) {}

  std::vector<Point2> run(const std::vector<Stmt>& program) {
    scopes_.emplace_back();
    exec_block(program);
    return std::move(points_);
  }

 private:
  void step(SourceLoc loc) {
    if (++steps_ > budget_)
      throw LayoutRuntimeError(RuntimeFault::BudgetExceeded, loc,
                               "step budget of " + std::to_string(budget_) + " exhausted");
  }

  void exec_block(const std::vector<Stmt>& stmts) {
    for (const auto& s : stmts) exec(s);
  }

  void exec_scoped(const std::vector<Stmt>& stmts) {
    scopes_.emplace_back();
    exec_block(stmts);
    scopes_.pop_back();
  }

  void exec(const Stmt& s) {
    step(s.loc);
    switch (s.kind) {
      case Stmt::Kind::Let:
        scopes_.back()[s.name] = eval(s.exprs[0]);
        break;
      case Stmt::Kind::Emit: {
        const Value v = eval(s.exprs[0]);
        if (v.tag != Value::Tag::Point)
          throw LayoutRuntimeError(RuntimeFault::TypeMismatch, s.exprs[0].loc,
                                   std::string("emit expects a point, got ") + tag_name(v.tag));
        points_.push_back(v.point);
        break;
      }
      case Stmt::Kind::If: {
        const Value c = eval(s.exprs[0]);
        require_numeric(c, s.exprs[0].loc, "if condition");
        if (c.as_double() != 0.0) exec_scoped(s.body);
        else exec_scoped(s.else_body);
        break;
      }
      case Stmt::Kind::For: {
        const std::int64_t lo = loop_bound(s.exprs[0]);
        const std::int64_t hi = loop_bound(s.exprs[1]);
        if (hi - lo > kMaxLoopIterations)
          throw LayoutRuntimeError(RuntimeFault::LoopTooLong, s.loc,
                                   "loop runs " + std::to_string(hi - lo) + " iterations, limit is " +
                                       std::to_string(kMaxLoopIterations));
        for (std::int64_t i = lo; i < hi; ++i) {
          scopes_.emplace_back();
          scopes_.back()[s.name] = Value::of_int(i);
          exec_block(s.body);
          scopes_.pop_back();
        }
        break;
      }
    }
  }

  std::int64_t loop_bound(const Expr& e) {
    const Value v = eval(e);
    if (v.tag != Value::Tag::Integer)
      throw LayoutRuntimeError(RuntimeFault::TypeMismatch, e.loc,
                               std::string("loop bounds must be integers, got ") + tag_name(v.tag));
    return v.integer;
  }

  static void require_numeric(const Value& v, SourceLoc loc, const char* what) {
    if (!v.numeric())
      throw LayoutRuntimeError(RuntimeFault::TypeMismatch, loc,
                               std::string(what) + " must be numeric, got a point");
  }

  static Value finite(double v, SourceLoc loc) {
    if (!std::isfinite(v))
      throw LayoutRuntimeError(RuntimeFault::NonFinite, loc, "expression produced a non-finite value");
    return Value::of_real(v);
  }

  const Value& lookup(const Expr& e) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(e.name);
      if (f != it->end()) return f->second;
    }
    throw LayoutRuntimeError(RuntimeFault::UndefinedVariable, e.loc,
                             "'" + e.name + "' is not defined");
  }

  Value eval(const Expr& e) {
    step(e.loc);
    switch (e.kind) {
      case Expr::Kind::Real: return finite(e.real, e.loc);
      case Expr::Kind::Integer: return Value::of_int(e.integer);
      case Expr::Kind::Variable:
        if (e.name == "pi") return Value::of_real(std::numbers::pi);
        return lookup(e);
      case Expr::Kind::Negate: {
        const Value v = eval(e.args[0]);
        require_numeric(v, e.loc, "operand of unary '-'");
        if (v.tag == Value::Tag::Integer) return Value::of_int(-v.integer);
        return Value::of_real(-v.real);
      }
      case Expr::Kind::Binary: return binary(e);
      case Expr::Kind::Compare: {
        const Value a = eval(e.args[0]);
        const Value b = eval(e.args[1]);
        require_numeric(a, e.args[0].loc, "comparison operand");
        require_numeric(b, e.args[1].loc, "comparison operand");
        const double x = a.as_double();
        const double y = b.as_double();
        bool r = false;
        if (e.name == "<") r = x < y;
        else if (e.name == "<=") r = x <= y;
        else if (e.name == ">") r = x > y;
        else if (e.name == ">=") r = x >= y;
        else if (e.name == "==") r = x == y;
        else r = x != y;
        return Value::of_int(r ? 1 : 0);
      }
      case Expr::Kind::Call: return call(e);
    }
    return {};
  }

  Value binary(const Expr& e) {
    const Value a = eval(e.args[0]);
    const Value b = eval(e.args[1]);
    const char op = e.name[0];
    if (a.tag == Value::Tag::Point || b.tag == Value::Tag::Point) {
      if (a.tag == Value::Tag::Point && b.tag == Value::Tag::Point && (op == '+' || op == '-')) {
        const Point2 r = op == '+' ? a.point + b.point : a.point - b.point;
        if (!std::isfinite(r.x) || !std::isfinite(r.y))
          throw LayoutRuntimeError(RuntimeFault::NonFinite, e.loc, "point arithmetic overflowed");
        return Value::of_point(r);
      }
      throw LayoutRuntimeError(RuntimeFault::TypeMismatch, e.loc,
                               std::string("operator '") + e.name + "' not defined for " +
                                   tag_name(a.tag) + " and " + tag_name(b.tag));
    }
    if (op == '/' && b.as_double() == 0.0)
      throw LayoutRuntimeError(RuntimeFault::DivisionByZero, e.loc, "division by zero");
    if (a.tag == Value::Tag::Integer && b.tag == Value::Tag::Integer && op != '/' && op != '^') {
      const std::int64_t x = a.integer;
      const std::int64_t y = b.integer;
      std::int64_t r = 0;
      bool overflow = false;
      switch (op) {
        case '+': overflow = __builtin_add_overflow(x, y, &r); break;
        case '-': overflow = __builtin_sub_overflow(x, y, &r); break;
        default: overflow = __builtin_mul_overflow(x, y, &r); break;
      }
      if (overflow)
        throw LayoutRuntimeError(RuntimeFault::NonFinite, e.loc, "integer overflow");
      return Value::of_int(r);
    }
    const double x = a.as_double();
    const double y = b.as_double();
    switch (op) {
      case '+': return finite(x + y, e.loc);
      case '-': return finite(x - y, e.loc);
      case '*': return finite(x * y, e.loc);
      case '/': return finite(x / y, e.loc);
      default: return finite(std::pow(x, y), e.loc);
    }
  }

  Value call(const Expr& e) {
    std::vector<Value> args;
    args.reserve(e.args.size());
    for (const auto& a : e.args) args.push_back(eval(a));
    if (e.name == "point") {
      require_numeric(args[0], e.args[0].loc, "point x");
      require_numeric(args[1], e.args[1].loc, "point y");
      return Value::of_point({args[0].as_double(), args[1].as_double()});
    }
    for (std::size_t i = 0; i < args.size(); ++i)
      require_numeric(args[i], e.args[i].loc, "function argument");
    const double x = args[0].as_double();
    if (e.name == "sin") return finite(std::sin(x), e.loc);
    if (e.name == "cos") return finite(std::cos(x), e.loc);
    if (e.name == "tan") return finite(std::tan(x), e.loc);
    if (e.name == "sqrt") return finite(std::sqrt(x), e.loc);
    if (e.name == "abs") {
      if (args[0].tag == Value::Tag::Integer) return Value::of_int(args[0].integer < 0 ? -args[0].integer : args[0].integer);
      return finite(std::abs(x), e.loc);
    }
    if (e.name == "floor") {
      const double f = std::floor(x);
      if (!std::isfinite(f) || std::abs(f) > 9.0e15)
        throw LayoutRuntimeError(RuntimeFault::NonFinite, e.loc, "floor argument out of range");
      return Value::of_int(static_cast<std::int64_t>(f));
    }
    const Value& a = args[0];
    const Value& b = args[1];
    const bool lhs_wins = e.name == "min" ? a.as_double() <= b.as_double() : a.as_double() >= b.as_double();
    return lhs_wins ? a : b;
  }

  std::int64_t budget_;
  std::int64_t steps_ = 0;
  std::vector<std::map<std::string, Value>> scopes_;
  std::vector<Point2> points_;
};

}  // namespace

std::vector<Point2> evaluate_layout(const LayoutScript& script, std::int64_t step_budget) {
  if (step_budget <= 0)
    throw LayoutRuntimeError(RuntimeFault::BudgetExceeded, {}, "step budget must be positive");
  return Interpreter(step_budget).run(script.statements);
}

}  // namespace emsim::layout
