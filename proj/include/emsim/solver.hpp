#pragma once

// Time-harmonic A-v eddy-current solver on P1 triangles.
//
// Unknowns: nodal A_z (zero on Gamma_out) and one constant u_i per conductor,
// with E_z = -j w A_z - u_i and J_z = sigma E_z inside conductor i.
// Sign convention: the constraint rows enforce  integral over Omega_c_i of
// J_z  = +I_i.  With this convention the time-averaged loss per unit length
// is  -1/2 Re(sum_i conj(u_i) I_i).

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Sparse>

#include "emsim/geometry.hpp"
#include "emsim/mesher.hpp"

namespace emsim::solver {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXcd;

struct FEProblem {
  mesh::TriMesh mesh;
  geometry::MaterialSpec material;
  geometry::ExcitationSpec excitation;
  std::vector<cplx> currents;  // one per conductor, amperes (peak)

  /// All conductors carry excitation.current_amplitude_A.
  static FEProblem make(mesh::TriMesh mesh, const geometry::MaterialSpec& material,
                        const geometry::ExcitationSpec& excitation);

  int conductor_count() const { return mesh.conductor_count(); }
  /// Conductor index (0-based) of a region tag, or -1 for the insulator.
  int conductor_of_tag(int tag) const;
  double sigma_of_tag(int tag) const;
};

class AssemblyError : public Error {
 public:
  explicit AssemblyError(const std::string& what) : Error("AssemblyError", what) {}
};

class SingularSystem : public Error {
 public:
  explicit SingularSystem(const std::string& what) : Error("SingularSystem", what) {}
};

using Mat3 = std::array<std::array<double, 3>, 3>;

/// nu * integral of grad N_i . grad N_j over the triangle.
Mat3 local_stiffness(Point2 p0, Point2 p1, Point2 p2, double nu);
/// integral of N_i N_j over a triangle of the given area.
Mat3 local_mass(double area);

struct DofMap {
  std::vector<int> node_dof;  // -1 on Dirichlet nodes
  int free_nodes = 0;
  int conductors = 0;
  int size() const { return free_nodes + conductors; }
  int conductor_dof(int i) const { return free_nodes + i; }
};

struct LinearSystem {
  SparseMatrix matrix;
  Vector rhs;
  DofMap dofs;
  double omega = 0.0;
};

/// Element matrices are computed in parallel and scattered in element order,
/// so the result is bitwise identical to assemble_serial.
LinearSystem assemble(const FEProblem& problem);
LinearSystem assemble_serial(const FEProblem& problem);

struct SolveResult {
  std::vector<cplx> a_z;  // per node, Wb/m
  std::vector<cplx> u;    // per conductor, V/m
  double residual_norm = 0.0;  // ||Ax - b|| / ||b||
  int dof_count = 0;
};

/// Sparse LU with iterative refinement; BiCGSTAB fallback when the
/// factorization fails. Throws SingularSystem if neither meets 1e-10.
Vector solve_linear(const SparseMatrix& a, const Vector& b, double* relative_residual = nullptr);

SolveResult solve(const LinearSystem& system);
SolveResult solve(const FEProblem& problem);

struct ElementFields {
  std::vector<cplx> bx, by;  // tesla, constant per triangle
  std::vector<cplx> hx, hy;  // A/m
  std::vector<cplx> ez;      // V/m, element mean; 0 outside conductors
  std::vector<cplx> jz;      // A/m^2
  std::vector<int> conductor;  // per triangle, -1 in the insulator
};

ElementFields derive_fields(const SolveResult& result, const FEProblem& problem);
ElementFields derive_fields_serial(const SolveResult& result, const FEProblem& problem);

/// Nodal E_z of triangle t (zero outside conductors).
std::array<cplx, 3> element_ez(const SolveResult& result, const FEProblem& problem, std::size_t t);

struct ConductorReport {
  cplx current;        // integral of J_z, amperes
  cplx voltage;        // u_i, V/m
  double loss = 0.0;   // W/m, time averaged
  double area = 0.0;   // m^2 of the meshed conductor
  double loss_density_min = 0.0;  // W/m^3 over element means
  double loss_density_max = 0.0;
  double loss_density_mean = 0.0;  // loss / area
};

std::vector<ConductorReport> conductor_report(const SolveResult& result, const FEProblem& problem);

/// -1/2 Re(sum conj(u_i) I_i), the loss predicted by the terminal quantities.
double terminal_power(const SolveResult& result, const FEProblem& problem);

}  // namespace emsim::solver
