#include <algorithm>
#include <cmath>

#include "emsim/solver.hpp"

namespace emsim::solver {

FEProblem FEProblem::make(mesh::TriMesh mesh, const geometry::MaterialSpec& material,
                          const geometry::ExcitationSpec& excitation) {
  FEProblem p;
  p.mesh = std::move(mesh);
  p.material = material;
  p.excitation = excitation;
  p.currents.assign(static_cast<std::size_t>(p.mesh.conductor_count()),
                    cplx(excitation.current_amplitude_A, 0.0));
  return p;
}

int FEProblem::conductor_of_tag(int tag) const {
  return (tag >= 1 && tag <= conductor_count()) ? tag - 1 : -1;
}

double FEProblem::sigma_of_tag(int tag) const {
  return conductor_of_tag(tag) >= 0 ? material.conductivity_S_per_m : 0.0;
}

Mat3 local_stiffness(Point2 p0, Point2 p1, Point2 p2, double nu) {
  const std::array<Point2, 3> p{p0, p1, p2};
  const double area2 = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
  std::array<double, 3> b{}, c{};
  for (int i = 0; i < 3; ++i) {
    const Point2 pj = p[static_cast<std::size_t>((i + 1) % 3)];
    const Point2 pk = p[static_cast<std::size_t>((i + 2) % 3)];
    b[static_cast<std::size_t>(i)] = pj.y - pk.y;
    c[static_cast<std::size_t>(i)] = pk.x - pj.x;
  }
  Mat3 k{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) k[i][j] = nu * (b[i] * b[j] + c[i] * c[j]) / (2.0 * area2);
  return k;
}

Mat3 local_mass(double area) {
  Mat3 m{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m[i][j] = area * (i == j ? 2.0 : 1.0) / 12.0;
  return m;
}

namespace {

struct ElementBlock {
  std::array<cplx, 9> kk{};       // nodal block, (K + j w sigma M)
  std::array<double, 3> c{};      // sigma * area / 3 per node
  double d = 0.0;                 // sigma * area
  int conductor = -1;
};

ElementBlock element_block(const FEProblem& pb, std::size_t t, double omega, double min_area) {
  const auto& tri = pb.mesh.triangles[t];
  const double area = pb.mesh.area(t);
  if (!(area > min_area))
    throw AssemblyError("degenerate triangle " + std::to_string(t) + " (area " +
                        std::to_string(area) + ")");
  const auto& n = pb.mesh.nodes;
  const Mat3 k = local_stiffness(n[static_cast<std::size_t>(tri.v[0])],
                                 n[static_cast<std::size_t>(tri.v[1])],
                                 n[static_cast<std::size_t>(tri.v[2])], pb.material.reluctivity);
  ElementBlock e;
  e.conductor = pb.conductor_of_tag(tri.tag);
  const double sigma = pb.sigma_of_tag(tri.tag);
  const Mat3 m = local_mass(area);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      e.kk[i * 3 + j] = cplx(k[i][j], omega * sigma * m[i][j]);
  if (e.conductor >= 0) {
    e.c.fill(sigma * area / 3.0);
    e.d = sigma * area;
  }
  return e;
}

double degenerate_area(const mesh::TriMesh& mesh) {
  double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
  if (!mesh.nodes.empty()) {
    lo_x = hi_x = mesh.nodes[0].x;
    lo_y = hi_y = mesh.nodes[0].y;
  }
  for (const auto& p : mesh.nodes) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  const double scale = std::max(hi_x - lo_x, hi_y - lo_y);
  return 1e-16 * scale * scale;
}

DofMap make_dofs(const FEProblem& pb) {
  DofMap d;
  d.node_dof.assign(pb.mesh.nodes.size(), 0);
  for (const auto& e : pb.mesh.boundary_edges)
    for (int v : e.v) d.node_dof[static_cast<std::size_t>(v)] = -1;
  for (auto& x : d.node_dof)
    if (x == 0) x = d.free_nodes++;
  d.conductors = pb.conductor_count();
  return d;
}

void check_problem(const FEProblem& pb) {
  geometry::validate(pb.material);
  geometry::validate(pb.excitation);
  if (pb.conductor_count() == 0) throw AssemblyError("mesh has no conductor regions");
  if (pb.currents.size() != static_cast<std::size_t>(pb.conductor_count()))
    throw AssemblyError("expected one imposed current per conductor");
  if (!(pb.material.conductivity_S_per_m > 0.0))
    throw AssemblyError("conductor regions need positive conductivity");
  std::vector<bool> seen(static_cast<std::size_t>(pb.conductor_count()), false);
  for (const auto& t : pb.mesh.triangles) {
    const int c = pb.conductor_of_tag(t.tag);
    if (c >= 0) seen[static_cast<std::size_t>(c)] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw AssemblyError("group Omega_c_" + std::to_string(i + 1) + " is empty");
}

LinearSystem scatter(const FEProblem& pb, const std::vector<ElementBlock>& blocks) {
  LinearSystem sys;
  sys.omega = pb.excitation.angular_frequency();
  sys.dofs = make_dofs(pb);
  const auto& dofs = sys.dofs;
  const cplx jw(0.0, sys.omega);
  const bool dc = sys.omega == 0.0;

  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(blocks.size() * 15);
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    const auto& e = blocks[t];
    const auto& v = pb.mesh.triangles[t].v;
    for (std::size_t i = 0; i < 3; ++i) {
      const int di = dofs.node_dof[static_cast<std::size_t>(v[i])];
      if (di < 0) continue;
      for (std::size_t j = 0; j < 3; ++j) {
        const int dj = dofs.node_dof[static_cast<std::size_t>(v[j])];
        if (dj >= 0) trip.emplace_back(di, dj, e.kk[i * 3 + j]);
      }
      if (e.conductor >= 0) {
        const int dc_col = dofs.conductor_dof(e.conductor);
        trip.emplace_back(di, dc_col, e.c[i]);
        // constraint row divided by j w; at w = 0 the A coupling vanishes
        if (!dc) trip.emplace_back(dc_col, di, e.c[i]);
      }
    }
    if (e.conductor >= 0) {
      const int k = dofs.conductor_dof(e.conductor);
      trip.emplace_back(k, k, dc ? cplx(e.d) : cplx(e.d) / jw);
    }
  }
  sys.matrix.resize(dofs.size(), dofs.size());
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();

  sys.rhs = Vector::Zero(dofs.size());
  for (int i = 0; i < dofs.conductors; ++i) {
    const cplx current = pb.currents[static_cast<std::size_t>(i)];
    sys.rhs[dofs.conductor_dof(i)] = dc ? -current : -current / jw;
  }
  return sys;
}

}  // namespace

LinearSystem assemble_serial(const FEProblem& problem) {
  check_problem(problem);
  const double omega = problem.excitation.angular_frequency();
  const double min_area = degenerate_area(problem.mesh);
  std::vector<ElementBlock> blocks;
  blocks.reserve(problem.mesh.triangles.size());
  for (std::size_t t = 0; t < problem.mesh.triangles.size(); ++t)
    blocks.push_back(element_block(problem, t, omega, min_area));
  return scatter(problem, blocks);
}

LinearSystem assemble(const FEProblem& problem) {
  check_problem(problem);
  const double omega = problem.excitation.angular_frequency();
  const double min_area = degenerate_area(problem.mesh);
  const auto n = static_cast<std::int64_t>(problem.mesh.triangles.size());
  std::vector<ElementBlock> blocks(static_cast<std::size_t>(n));
  std::int64_t bad = -1;
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < n; ++t) {
    try {
      blocks[static_cast<std::size_t>(t)] =
          element_block(problem, static_cast<std::size_t>(t), omega, min_area);
    } catch (const AssemblyError&) {
#pragma omp critical
      bad = (bad < 0) ? t : std::min(bad, t);
    }
  }
  // rethrow the first failing element, same message as the serial path
  if (bad >= 0) element_block(problem, static_cast<std::size_t>(bad), omega, min_area);
  return scatter(problem, blocks);
}

}  // namespace emsim::solver
