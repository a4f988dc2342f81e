#include <cmath>
#include <limits>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#ifdef EMSIM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "emsim/solver.hpp"

namespace emsim::solver {

namespace {

constexpr double kResidualTarget = 1e-10;

double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b) {
  const double nb = b.norm();
  const double nr = (b - a * x).norm();
  return nb > 0.0 ? nr / nb : nr;
}

}  // namespace

Vector solve_linear(const SparseMatrix& a, const Vector& b, double* relative_residual_out) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw SingularSystem("matrix and right-hand side sizes disagree");
  if (b.norm() == 0.0) {
    if (relative_residual_out) *relative_residual_out = 0.0;
    return Vector::Zero(b.size());
  }

  Vector x;
  double res = std::numeric_limits<double>::infinity();
#ifdef EMSIM_HAVE_UMFPACK
  Eigen::UmfPackLU<SparseMatrix> lu;
#else
  // much slower than UMFPACK once the conductor rows fill in
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
#endif
  lu.compute(a);
  if (lu.info() == Eigen::Success) {
    x = lu.solve(b);
    res = relative_residual(a, x, b);
    for (int it = 0; it < 3 && res > 1e-14 && std::isfinite(res); ++it) {
      const Vector r = b - a * x;
      Vector y = x + lu.solve(r);
      const double next = relative_residual(a, y, b);
      if (!(next < res)) break;
      x = std::move(y);
      res = next;
    }
  }
  if (!(res <= kResidualTarget)) {
    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<cplx>> it;
    it.setTolerance(kResidualTarget * 0.1);
    it.setMaxIterations(20 * static_cast<int>(a.rows()) + 100);
    it.compute(a);
    if (it.info() == Eigen::Success) {
      Vector y = it.solve(b);
      const double r2 = relative_residual(a, y, b);
      if (r2 < res) {
        x = std::move(y);
        res = r2;
      }
    }
  }
  if (!(res <= kResidualTarget))
    throw SingularSystem("linear solve did not reach the residual target (relative residual " +
                         std::to_string(res) + ")");
  if (relative_residual_out) *relative_residual_out = res;
  return x;
}

SolveResult solve(const LinearSystem& system) {
  double res = 0.0;
  const Vector x = solve_linear(system.matrix, system.rhs, &res);
  SolveResult out;
  out.residual_norm = res;
  out.dof_count = system.dofs.size();
  out.a_z.assign(system.dofs.node_dof.size(), cplx(0.0));
  for (std::size_t n = 0; n < system.dofs.node_dof.size(); ++n) {
    const int d = system.dofs.node_dof[n];
    if (d >= 0) out.a_z[n] = x[d];
  }
  out.u.resize(static_cast<std::size_t>(system.dofs.conductors));
  for (int i = 0; i < system.dofs.conductors; ++i)
    out.u[static_cast<std::size_t>(i)] = x[system.dofs.conductor_dof(i)];
  return out;
}

SolveResult solve(const FEProblem& problem) { return solve(assemble(problem)); }

}  // namespace emsim::solver
