#include <array>
#include <cmath>
#include <map>
#include <optional>

#include "emsim/postdsl.hpp"

namespace emsim::post {

std::set<std::string> region_names(int conductor_count) {
  std::set<std::string> s{"Omega", "Omega_c", "Omega_i", "Gamma_out"};
  for (int i = 1; i <= conductor_count; ++i) s.insert("Omega_c_" + std::to_string(i));
  return s;
}

std::set<std::string> region_names(const mesh::TriMesh& mesh) {
  auto s = region_names(mesh.conductor_count());
  for (const auto& [name, tag] : mesh.groups) s.insert(name);
  return s;
}

namespace {

enum class Kind { Scalar, Vector, Unknown };

const char* kind_name(Kind k) { return k == Kind::Vector ? "vector" : "scalar"; }

bool conductive(const std::string& region) {
  return region == "Omega" || region == "Omega_c" || region.rfind("Omega_c_", 0) == 0;
}

bool uses_call(const FieldExpr& e, std::string_view fn) {
  if (e.kind == FieldExpr::Kind::Call && e.name == fn) return true;
  for (const auto& a : e.args)
    if (uses_call(a, fn)) return true;
  return false;
}

struct Checker {
  const Formulation& form;
  std::vector<Diagnostic>& out;

  void error(const std::string& layer, const std::string& msg, SourceLoc loc) {
    out.push_back({Severity::Error, layer, msg, loc});
  }

  Kind field_kind(const std::string& name) const {
    if (name == "v" || name == "phi" || name == "az" || name == "ur" || name == "ir") return Kind::Scalar;
    return Kind::Vector;
  }

  Kind check(const FieldExpr& e) {
    switch (e.kind) {
      case FieldExpr::Kind::Number:
        return Kind::Scalar;
      case FieldExpr::Kind::Field:
        if (form.primary.count(e.name)) return Kind::Vector;
        if (form.secondary.count(e.name)) {
          error("dsl_semantics",
                "field {" + e.name + "} is not a primary variable of formulation " + form.name +
                    " (available: {a}, {grad_phi}, {d a})",
                e.loc);
          return field_kind(e.name);
        }
        error("dsl_semantics", "unknown field reference {" + e.name + "}", e.loc);
        return Kind::Unknown;
      case FieldExpr::Kind::Call:
        return check_call(e);
      case FieldExpr::Kind::Negate:
        return check(e.args[0]);
      case FieldExpr::Kind::Binary:
        return check_binary(e);
    }
    return Kind::Unknown;
  }

  Kind check_call(const FieldExpr& e) {
    auto arity = [&](std::size_t n) {
      if (e.args.size() == n) return true;
      error("dsl_semantics",
            e.name + "[] takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s") + ", got " +
                std::to_string(e.args.size()),
            e.loc);
      return false;
    };
    if (e.name == "sigma" || e.name == "nu") {
      arity(0);
      return Kind::Scalar;
    }
    if (e.name == "Dt") {
      if (!arity(1)) return Kind::Unknown;
      if (e.args[0].kind != FieldExpr::Kind::Field)
        error("dsl_semantics", "Dt[] applies only to field references, got " + to_string(e.args[0]),
              e.args[0].loc);
      return check(e.args[0]);
    }
    if (e.name == "Norm") {
      if (!arity(1)) return Kind::Unknown;
      check(e.args[0]);
      return Kind::Scalar;
    }
    error("dsl_semantics", "unknown function " + e.name + "[]", e.loc);
    for (const auto& a : e.args) check(a);
    return Kind::Unknown;
  }

  Kind check_binary(const FieldExpr& e) {
    const Kind l = check(e.args[0]);
    const Kind r = check(e.args[1]);
    if (l == Kind::Unknown || r == Kind::Unknown) return Kind::Unknown;
    switch (e.op) {
      case '+':
      case '-':
        if (l != r) {
          error("physics_syntax",
                std::string(kind_name(l)) + (e.op == '+' ? " plus " : " minus ") + kind_name(r) +
                    ": " + to_string(e),
                e.loc);
          return Kind::Unknown;
        }
        return l;
      case '*':
        if (l == Kind::Vector && r == Kind::Vector) {
          error("physics_syntax", "product of two vectors is undefined: " + to_string(e), e.loc);
          return Kind::Unknown;
        }
        return (l == Kind::Vector || r == Kind::Vector) ? Kind::Vector : Kind::Scalar;
      case '/':
        if (r == Kind::Vector) {
          error("physics_syntax", "division by a vector: " + to_string(e), e.loc);
          return Kind::Unknown;
        }
        return l;
      case '^':
        if (l == Kind::Vector || r == Kind::Vector) {
          error("physics_syntax", "power of a vector is undefined (use Norm[]): " + to_string(e), e.loc);
          return Kind::Unknown;
        }
        return Kind::Scalar;
    }
    return Kind::Unknown;
  }
};

}  // namespace

std::vector<Diagnostic> validate_post(const PostProgram& program, const std::set<std::string>& regions,
                                      const Formulation& formulation) {
  std::vector<Diagnostic> out;
  Checker ck{formulation, out};
  std::map<std::string, const PostProcessingBlock*> procs;
  std::set<std::string> quantity_names;

  for (const auto& b : program.processings) {
    if (b.name.empty()) ck.error("dsl_semantics", "PostProcessing item without Name", b.loc);
    else if (!procs.emplace(b.name, &b).second)
      ck.error("dsl_semantics", "duplicate PostProcessing name " + b.name, b.loc);
    if (b.formulation != formulation.name)
      ck.error("dsl_semantics",
               b.formulation.empty() ? "PostProcessing " + b.name + " has no NameOfFormulation"
                                     : "unknown formulation " + b.formulation + " (available: " +
                                           formulation.name + ")",
               b.loc);
    for (const auto& q : b.quantities) {
      if (!quantity_names.insert(q.name).second)
        ck.error("dsl_semantics", "duplicate PostQuantity name " + q.name, q.loc);
      bool any_conductive = false;
      for (const auto& r : q.regions) {
        if (!regions.count(r)) ck.error("dsl_semantics", "unknown region " + r + " in " + q.name, q.loc);
        else any_conductive = any_conductive || conductive(r);
      }
      if (q.jacobian != "Vol")
        ck.error("dsl_semantics", "unsupported Jacobian " + q.jacobian + " (only Vol)", q.loc);
      ck.check(q.expr);
      if (uses_call(q.expr, "sigma") && !any_conductive)
        ck.error("dsl_semantics", "sigma[] used in " + q.name + " but no conductive region is in scope",
                 q.loc);
    }
  }

  std::set<std::string> op_names;
  for (const auto& b : program.operations) {
    if (!b.name.empty() && !op_names.insert(b.name).second)
      ck.error("dsl_semantics", "duplicate PostOperation name " + b.name, b.loc);
    const auto it = procs.find(b.processing);
    if (it == procs.end())
      ck.error("dsl_semantics", "PostOperation " + b.name + " refers to unknown PostProcessing '" +
                                    b.processing + "'",
               b.loc);
    for (const auto& p : b.prints) {
      if (it != procs.end()) {
        bool found = false;
        for (const auto& q : it->second->quantities) found = found || q.name == p.quantity;
        if (!found)
          ck.error("dsl_semantics",
                   "Print of undeclared quantity " + p.quantity + " in PostProcessing " + b.processing,
                   p.loc);
      }
      if (!regions.count(p.region))
        ck.error("dsl_semantics", "unknown region " + p.region + " in OnElementsOf", p.loc);
      if (!p.format.empty() && p.format != "Gmsh")
        ck.error("dsl_semantics", "unsupported Format " + p.format + " (only Gmsh)", p.loc);
      try {
        confined_print_path(p);
      } catch (const EvalError& e) {
        ck.error("dsl_semantics", e.what(), p.loc);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// physics lint

namespace {

using Dim = std::array<double, 4>;  // kg, m, s, A

std::optional<Dim> field_dim(const std::string& f) {
  if (f == "a" || f == "az") return Dim{1, 1, -2, -1};          // Wb/m
  if (f == "grad_phi" || f == "e") return Dim{1, 1, -3, -1};    // V/m
  if (f == "d a" || f == "b") return Dim{1, 0, -2, -1};         // T
  if (f == "h") return Dim{0, -1, 0, 1};                        // A/m
  if (f == "j") return Dim{0, -2, 0, 1};                        // A/m^2
  if (f == "v" || f == "phi") return Dim{1, 2, -3, -1};         // V
  return std::nullopt;
}

std::string dim_name(const Dim& d) {
  static const std::vector<std::pair<Dim, const char*>> named{
      {{0, 0, 0, 0}, "1"},        {{1, 1, -2, -1}, "Wb/m"},  {{1, 1, -3, -1}, "V/m"},
      {{1, 0, -2, -1}, "T"},      {{0, -1, 0, 1}, "A/m"},    {{0, -2, 0, 1}, "A/m^2"},
      {{1, 2, -3, -1}, "V"},      {{-1, -3, 3, 2}, "S/m"},   {{-1, -1, 2, 2}, "m/H"},
      {{0, 0, -1, 0}, "1/s"},     {{1, -1, -3, 0}, "W/m^3"}, {{1, -1, -2, 0}, "J/m^3"}};
  for (const auto& [dim, name] : named)
    if (dim == d) return name;
  static const char* base[] = {"kg", "m", "s", "A"};
  std::string s;
  for (int i = 0; i < 4; ++i) {
    if (d[static_cast<std::size_t>(i)] == 0) continue;
    if (!s.empty()) s += " ";
    s += base[i];
    if (d[static_cast<std::size_t>(i)] != 1) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "^%g", d[static_cast<std::size_t>(i)]);
      s += buf;
    }
  }
  return s;
}

Dim add(Dim a, const Dim& b, double scale = 1.0) {
  for (std::size_t i = 0; i < 4; ++i) a[i] += scale * b[i];
  return a;
}

// Dimension of e, or nullopt when it cannot be determined. Unit clashes in
// sums are appended to `out`.
std::optional<Dim> dims(const FieldExpr& e, std::vector<Diagnostic>& out) {
  switch (e.kind) {
    case FieldExpr::Kind::Number:
      return Dim{0, 0, 0, 0};
    case FieldExpr::Kind::Field:
      return field_dim(e.name);
    case FieldExpr::Kind::Negate:
      return dims(e.args[0], out);
    case FieldExpr::Kind::Call:
      if (e.name == "sigma") return Dim{-1, -3, 3, 2};
      if (e.name == "nu") return Dim{-1, -1, 2, 2};
      if (e.name == "Dt" && e.args.size() == 1) {
        auto d = dims(e.args[0], out);
        if (d) (*d)[2] -= 1;
        return d;
      }
      if (e.name == "Norm" && e.args.size() == 1) return dims(e.args[0], out);
      for (const auto& a : e.args) dims(a, out);
      return std::nullopt;
    case FieldExpr::Kind::Binary: {
      const auto l = dims(e.args[0], out);
      const auto r = dims(e.args[1], out);
      switch (e.op) {
        case '+':
        case '-':
          if (l && r && *l != *r) {
            out.push_back({Severity::Warning, "physics_semantics",
                           "unit mismatch: " + dim_name(*l) + (e.op == '+' ? " plus " : " minus ") +
                               dim_name(*r) + " in " + to_string(e),
                           e.loc});
            return std::nullopt;
          }
          return l ? l : r;
        case '*':
          if (l && r) return add(*l, *r);
          return std::nullopt;
        case '/':
          if (l && r) return add(*l, *r, -1.0);
          return std::nullopt;
        case '^':
          if (l && e.args[1].kind == FieldExpr::Kind::Number) {
            Dim d{};
            for (std::size_t i = 0; i < 4; ++i) d[i] = (*l)[i] * e.args[1].number;
            return d;
          }
          if (l && *l == Dim{0, 0, 0, 0}) return l;
          return std::nullopt;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

struct Factor {
  const FieldExpr* expr;
  int exponent;  // +1 numerator, -1 denominator
};

// Flattens a product/quotient tree into numeric coefficient * factors.
void flatten(const FieldExpr& e, int sign, double& coeff, std::vector<Factor>& factors) {
  if (e.kind == FieldExpr::Kind::Number) {
    coeff = sign > 0 ? coeff * e.number : coeff / e.number;
    return;
  }
  if (e.kind == FieldExpr::Kind::Negate) {
    coeff = -coeff;
    flatten(e.args[0], sign, coeff, factors);
    return;
  }
  if (e.kind == FieldExpr::Kind::Binary && (e.op == '*' || e.op == '/')) {
    flatten(e.args[0], sign, coeff, factors);
    flatten(e.args[1], e.op == '*' ? sign : -sign, coeff, factors);
    return;
  }
  factors.push_back({&e, sign});
}

bool is_call(const FieldExpr& e, std::string_view name, std::size_t nargs) {
  return e.kind == FieldExpr::Kind::Call && e.name == name && e.args.size() == nargs;
}

// Norm[X]^2 -> &X
const FieldExpr* norm_squared_arg(const FieldExpr& e) {
  if (e.kind == FieldExpr::Kind::Binary && e.op == '^' && e.args[1].kind == FieldExpr::Kind::Number &&
      e.args[1].number == 2.0 && is_call(e.args[0], "Norm", 1))
    return &e.args[0].args[0];
  return nullptr;
}

// Linear combination of Dt[{a}] and {grad_phi}; false when e is not of that shape.
bool linear_terms(const FieldExpr& e, double scale, std::map<std::string, double>& terms) {
  switch (e.kind) {
    case FieldExpr::Kind::Negate:
      return linear_terms(e.args[0], -scale, terms);
    case FieldExpr::Kind::Field:
      terms["{" + e.name + "}"] += scale;
      return true;
    case FieldExpr::Kind::Call:
      if (is_call(e, "Dt", 1) && e.args[0].kind == FieldExpr::Kind::Field) {
        terms["Dt[{" + e.args[0].name + "}]"] += scale;
        return true;
      }
      return false;
    case FieldExpr::Kind::Binary:
      if (e.op == '+' || e.op == '-')
        return linear_terms(e.args[0], scale, terms) &&
               linear_terms(e.args[1], e.op == '+' ? scale : -scale, terms);
      if (e.op == '*' && e.args[0].kind == FieldExpr::Kind::Number)
        return linear_terms(e.args[1], scale * e.args[0].number, terms);
      if (e.op == '*' && e.args[1].kind == FieldExpr::Kind::Number)
        return linear_terms(e.args[0], scale * e.args[1].number, terms);
      return false;
    default:
      return false;
  }
}

std::string factor_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void lint_quantity(const PostQuantity& q, std::vector<Diagnostic>& out) {
  dims(q.expr, out);

  double coeff = 1.0;
  std::vector<Factor> factors;
  flatten(q.expr, +1, coeff, factors);
  if (factors.size() != 2) return;
  const FieldExpr* material = nullptr;
  const FieldExpr* norm_arg = nullptr;
  for (const auto& f : factors) {
    if (f.exponent != 1) return;
    if (is_call(*f.expr, "nu", 0) || is_call(*f.expr, "sigma", 0)) material = f.expr;
    else norm_arg = norm_squared_arg(*f.expr);
  }
  if (!material || !norm_arg) return;

  if (material->name == "nu" && norm_arg->kind == FieldExpr::Kind::Field && norm_arg->name == "d a") {
    if (std::abs(coeff - 0.25) > 1e-12)
      out.push_back({Severity::Warning, "physics_semantics",
                     "factor " + factor_text(coeff) + " vs. 0.25 in magnetic energy density " + q.name +
                         ": the time-averaged value is 0.25 * nu[] * Norm[{d a}]^2",
                     q.expr.loc});
    return;
  }
  if (material->name != "sigma") return;
  if (std::abs(coeff - 0.5) > 1e-12)
    out.push_back({Severity::Warning, "physics_semantics",
                   "factor " + factor_text(coeff) + " vs. 0.5 in ohmic loss density " + q.name +
                       ": the time-averaged value is sigma[]/2 * Norm[-Dt[{a}] - {grad_phi}]^2",
                   q.expr.loc});

  std::map<std::string, double> terms;
  const bool linear = linear_terms(*norm_arg, 1.0, terms);
  for (auto it = terms.begin(); it != terms.end();) it = it->second == 0.0 ? terms.erase(it) : std::next(it);
  const auto coef = [&](const std::string& k) {
    const auto it = terms.find(k);
    return it == terms.end() ? 0.0 : it->second;
  };
  const double ca = coef("Dt[{a}]");
  const double cg = coef("{grad_phi}");
  const bool only_known = linear && terms.size() == static_cast<std::size_t>((ca != 0) + (cg != 0));
  // Norm is even, so E and -E are both fine
  const bool exact = only_known && std::abs(ca) == 1.0 && ca == cg;
  if (exact) return;
  const bool partial = only_known && (ca == 0.0) != (cg == 0.0) && std::abs(ca + cg) == 1.0;
  out.push_back({Severity::Warning, "physics_semantics",
                 (partial ? "incomplete electric field expression " : "electric field expression ") +
                     to_string(*norm_arg) + (partial ? ": expected " : " does not match ") +
                     "-Dt[{a}] - {grad_phi}",
                 norm_arg->loc});
}

}  // namespace

std::vector<Diagnostic> physics_lint(const PostProgram& program) {
  std::vector<Diagnostic> out;
  for (const auto& b : program.processings)
    for (const auto& q : b.quantities) lint_quantity(q, out);
  return out;
}

}  // namespace emsim::post
