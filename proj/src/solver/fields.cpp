#include <algorithm>
#include <limits>

#include "emsim/solver.hpp"

namespace emsim::solver {

std::array<cplx, 3> element_ez(const SolveResult& result, const FEProblem& problem, std::size_t t) {
  const auto& tri = problem.mesh.triangles[t];
  const int c = problem.conductor_of_tag(tri.tag);
  std::array<cplx, 3> e{};
  if (c < 0) return e;
  const cplx jw(0.0, problem.excitation.angular_frequency());
  const cplx u = result.u[static_cast<std::size_t>(c)];
  for (std::size_t k = 0; k < 3; ++k)
    e[k] = -jw * result.a_z[static_cast<std::size_t>(tri.v[k])] - u;
  return e;
}

namespace {

void fill_element(const SolveResult& result, const FEProblem& pb, std::size_t t, ElementFields& f) {
  const auto& tri = pb.mesh.triangles[t];
  const auto& n = pb.mesh.nodes;
  const Point2 p0 = n[static_cast<std::size_t>(tri.v[0])];
  const Point2 p1 = n[static_cast<std::size_t>(tri.v[1])];
  const Point2 p2 = n[static_cast<std::size_t>(tri.v[2])];
  const std::array<Point2, 3> p{p0, p1, p2};
  const double area2 = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
  cplx dadx(0.0), dady(0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    const Point2 pj = p[(i + 1) % 3];
    const Point2 pk = p[(i + 2) % 3];
    const cplx a = result.a_z[static_cast<std::size_t>(tri.v[i])];
    dadx += a * ((pj.y - pk.y) / area2);
    dady += a * ((pk.x - pj.x) / area2);
  }
  // B = curl(A e_z) = (dA/dy, -dA/dx)
  f.bx[t] = dady;
  f.by[t] = -dadx;
  const double nu = pb.material.reluctivity;
  f.hx[t] = nu * f.bx[t];
  f.hy[t] = nu * f.by[t];
  const int c = pb.conductor_of_tag(tri.tag);
  f.conductor[t] = c;
  if (c >= 0) {
    const auto e = element_ez(result, pb, t);
    f.ez[t] = (e[0] + e[1] + e[2]) / 3.0;
    f.jz[t] = pb.material.conductivity_S_per_m * f.ez[t];
  } else {
    f.ez[t] = 0.0;
    f.jz[t] = 0.0;
  }
}

ElementFields sized(std::size_t n) {
  ElementFields f;
  f.bx.resize(n);
  f.by.resize(n);
  f.hx.resize(n);
  f.hy.resize(n);
  f.ez.resize(n);
  f.jz.resize(n);
  f.conductor.resize(n);
  return f;
}

}  // namespace

ElementFields derive_fields_serial(const SolveResult& result, const FEProblem& problem) {
  ElementFields f = sized(problem.mesh.triangles.size());
  for (std::size_t t = 0; t < problem.mesh.triangles.size(); ++t) fill_element(result, problem, t, f);
  return f;
}

ElementFields derive_fields(const SolveResult& result, const FEProblem& problem) {
  const auto n = static_cast<std::int64_t>(problem.mesh.triangles.size());
  ElementFields f = sized(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < n; ++t) fill_element(result, problem, static_cast<std::size_t>(t), f);
  return f;
}

std::vector<ConductorReport> conductor_report(const SolveResult& result, const FEProblem& problem) {
  const auto n = static_cast<std::size_t>(problem.conductor_count());
  std::vector<ConductorReport> out(n);
  for (auto& r : out) {
    r.loss_density_min = std::numeric_limits<double>::infinity();
    r.loss_density_max = -std::numeric_limits<double>::infinity();
  }
  const double sigma = problem.material.conductivity_S_per_m;
  for (std::size_t t = 0; t < problem.mesh.triangles.size(); ++t) {
    const int c = problem.conductor_of_tag(problem.mesh.triangles[t].tag);
    if (c < 0) continue;
    auto& r = out[static_cast<std::size_t>(c)];
    const double area = problem.mesh.area(t);
    const auto e = element_ez(result, problem, t);
    // exact integrals of the linear E_z: consistent mass for |E|^2
    const Mat3 m = local_mass(area);
    double e2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) e2 += m[i][j] * std::real(std::conj(e[i]) * e[j]);
    const double loss = 0.5 * sigma * e2;
    r.current += sigma * (e[0] + e[1] + e[2]) * (area / 3.0);
    r.loss += loss;
    r.area += area;
    r.loss_density_min = std::min(r.loss_density_min, loss / area);
    r.loss_density_max = std::max(r.loss_density_max, loss / area);
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i].voltage = result.u[i];
    out[i].loss_density_mean = out[i].area > 0.0 ? out[i].loss / out[i].area : 0.0;
  }
  return out;
}

double terminal_power(const SolveResult& result, const FEProblem& problem) {
  double p = 0.0;
  for (std::size_t i = 0; i < result.u.size(); ++i)
    p += std::real(std::conj(result.u[i]) * problem.currents[i]);
  return -0.5 * p;
}

}  // namespace emsim::solver
