#pragma once

// Sandboxed layout mini-language.
//
//   program := stmt*
//   stmt    := "let" ident "=" expr
//            | "for" ident "in" expr ".." expr block        (half-open range)
//            | "if" expr block ("else" block)?
//            | "emit" expr                                  (expr must be a point)
//   block   := "{" stmt* "}"
//   expr    := sum (cmp sum)?            cmp in < <= > >= == !=
//   sum     := term (("+"|"-") term)*
//   term    := unary (("*"|"/") unary)*
//   unary   := "-" unary | power
//   power   := primary ("^" unary)?
//   primary := number | ident | "pi" | call | "(" expr ")"
//   call    := (sin|cos|tan|sqrt|abs|min|max|floor|point) "(" expr ("," expr)* ")"
//
// There is no I/O, no user functions and no recursion; every loop is bounded.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "emsim/geometry.hpp"

namespace emsim::layout {

struct SourceLoc {
  int line = 1;
  int column = 1;
  friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
};

struct Diagnostic {
  SourceLoc loc;
  std::string message;
};

std::string format(const Diagnostic& d);

struct Expr {
  enum class Kind { Real, Integer, Variable, Negate, Binary, Compare, Call };

  Kind kind = Kind::Real;
  double real = 0.0;
  std::int64_t integer = 0;
  std::string name;  // variable, operator symbol or function name
  std::vector<Expr> args;
  SourceLoc loc;

  bool operator==(const Expr& o) const {
    return kind == o.kind && real == o.real && integer == o.integer && name == o.name &&
           args == o.args;
  }
};

struct Stmt {
  enum class Kind { Let, For, If, Emit };

  Kind kind = Kind::Let;
  std::string name;         // let target / loop variable
  std::vector<Expr> exprs;  // let: [value]; for: [lo, hi]; if: [cond]; emit: [point]
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;
  SourceLoc loc;

  bool operator==(const Stmt& o) const {
    return kind == o.kind && name == o.name && exprs == o.exprs && body == o.body &&
           else_body == o.else_body;
  }
};

struct LayoutScript {
  std::string source;
  std::vector<Stmt> statements;
};

class LayoutSyntaxError : public Error {
 public:
  explicit LayoutSyntaxError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

enum class RuntimeFault {
  DivisionByZero,
  NonFinite,
  BudgetExceeded,
  TypeMismatch,
  UndefinedVariable,
  LoopTooLong,
};

std::string_view to_string(RuntimeFault f);

class LayoutRuntimeError : public Error {
 public:
  LayoutRuntimeError(RuntimeFault fault, SourceLoc loc, const std::string& detail);
  RuntimeFault fault() const { return fault_; }
  SourceLoc loc() const { return loc_; }

 private:
  RuntimeFault fault_;
  SourceLoc loc_;
};

inline constexpr std::int64_t kDefaultStepBudget = 1'000'000;
inline constexpr std::int64_t kMaxLoopIterations = 10'000;

LayoutScript parse_layout(std::string_view source);

/// Runs the script and returns the emitted points in emission order.
/// Every statement and every expression node costs one step.
std::vector<Point2> evaluate_layout(const LayoutScript& script,
                                    std::int64_t step_budget = kDefaultStepBudget);

/// Structural description of the placement pattern, e.g. "circular
/// arrangement"; "custom arrangement" when nothing is recognized.
std::string describe_pattern(const LayoutScript& script);

}  // namespace emsim::layout
