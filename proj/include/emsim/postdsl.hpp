#pragma once

// GetDP-style post-processing subset:
//
//   PostProcessing { { Name P; NameOfFormulation F;
//       PostQuantity { { Name Q; Value { Local { [ expr ]; In Region[{R1, R2}]; Jacobian Vol; } } } } } }
//   PostOperation { { Name O; NameOfPostProcessing P;
//       Operation { Print[ Q, OnElementsOf R, File "Results/x.pos", Name "label", Format Gmsh ]; } } }
//
// `Term` is accepted as a synonym of `Local`; `In Omega` may replace the
// Region list. Expressions: + - * / ^, unary -, parentheses, numbers, field
// references {a} {grad_phi} {d a}, Dt[..], Norm[..], sigma[], nu[].
// Comments: // and /* */.

#include <array>
#include <complex>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "emsim/geometry.hpp"
#include "emsim/solver.hpp"

namespace emsim::post {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

struct FieldExpr {
  enum class Kind { Number, Field, Call, Negate, Binary };
  Kind kind = Kind::Number;
  double number = 0.0;
  std::string name;  // field ("a", "d a", ...) or function name
  char op = 0;       // Binary: + - * / ^
  std::vector<FieldExpr> args;
  SourceLoc loc;

  bool operator==(const FieldExpr& o) const;
};

struct PostQuantity {
  std::string name;
  std::string wrapper = "Local";  // or "Term"
  FieldExpr expr;
  std::vector<std::string> regions;
  bool region_list = true;  // In Region[{..}] rather than a bare group name
  std::string jacobian = "Vol";
  SourceLoc loc;

  bool operator==(const PostQuantity& o) const;
};

struct PostProcessingBlock {
  std::string name;
  std::string formulation;
  std::vector<PostQuantity> quantities;
  SourceLoc loc;

  bool operator==(const PostProcessingBlock& o) const;
};

struct PrintSpec {
  std::string quantity;
  std::string region;  // OnElementsOf
  std::string file;    // may be empty
  std::string label;   // Name "..."
  std::string format;  // Format tag, "Gmsh" when given
  SourceLoc loc;

  bool operator==(const PrintSpec& o) const;
};

struct PostOperationBlock {
  std::string name;
  std::string processing;
  std::vector<PrintSpec> prints;
  SourceLoc loc;

  bool operator==(const PostOperationBlock& o) const;
};

struct PostProgram {
  std::vector<PostProcessingBlock> processings;
  std::vector<PostOperationBlock> operations;

  bool operator==(const PostProgram& o) const = default;
  const PostQuantity* find_quantity(std::string_view name) const;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string layer;  // dsl_syntax | dsl_semantics | physics_syntax | physics_semantics
  std::string message;
  SourceLoc loc;
};

std::string format(const Diagnostic& d);

class DslSyntaxError : public Error {
 public:
  explicit DslSyntaxError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }
  SourceLoc loc() const { return diags_.front().loc; }

 private:
  std::vector<Diagnostic> diags_;
};

PostProgram parse_post(std::string_view source);
std::string pretty_print(const PostProgram& program);
std::string to_string(const FieldExpr& e);

/// What the built-in formulation offers.
struct Formulation {
  std::string name = "MagDyn_a";
  std::set<std::string> primary{"a", "grad_phi", "d a"};
  // recognised but not derivable from the primaries of this formulation
  std::set<std::string> secondary{"v", "b", "h", "e", "j", "az", "phi", "ur", "ir"};
};

/// Omega, Omega_c, Omega_i, Omega_c_1..Omega_c_n, Gamma_out.
std::set<std::string> region_names(int conductor_count);
std::set<std::string> region_names(const mesh::TriMesh& mesh);

std::vector<Diagnostic> validate_post(const PostProgram& program,
                                      const std::set<std::string>& regions,
                                      const Formulation& formulation = {});

/// Physics pattern checks: prefactors of the loss and energy densities,
/// the electric field form, SI unit consistency of sums.
std::vector<Diagnostic> physics_lint(const PostProgram& program);

class EvalError : public Error {
 public:
  explicit EvalError(const std::string& what) : Error("EvalError", what) {}
};

struct QuantityField {
  std::string name;
  bool vector = false;
  std::vector<std::array<solver::cplx, 3>> values;  // element means; scalar in [0]
  std::vector<char> in_region;
};

/// Per-element values of every declared quantity. Each element value is the
/// mean over the three edge midpoints, which integrates quadratics exactly.
std::vector<QuantityField> evaluate_post(const PostProgram& program, const solver::SolveResult& result,
                                         const solver::FEProblem& problem);
std::vector<QuantityField> evaluate_post_serial(const PostProgram& program,
                                                const solver::SolveResult& result,
                                                const solver::FEProblem& problem);

/// Named real arrays of one quantity: scalars give <name> when real and
/// <name>_re/_im/_abs otherwise; vectors give <name>_x_re ... <name>_abs.
struct NamedArray {
  std::string name;
  std::vector<double> values;
};
std::vector<NamedArray> quantity_arrays(const QuantityField& q);

/// Session-relative artifact path for a print (".pos" becomes ".vtk").
/// Throws EvalError when the path is absolute or leaves Results/.
std::filesystem::path confined_print_path(const PrintSpec& print);

/// Writes one .vtk and one .json per Print under `session_dir`; returns
/// session-relative paths in write order.
std::vector<std::filesystem::path> write_artifacts(const PostProgram& program,
                                                   const std::vector<QuantityField>& fields,
                                                   const solver::FEProblem& problem,
                                                   const std::filesystem::path& session_dir);

}  // namespace emsim::post
