// Serial vs. OpenMP element kernels on a 9-conductor ring. Range arg is the
// mesh scale in percent (smaller = finer mesh).

#include <benchmark/benchmark.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>

#include "emsim/geometry.hpp"
#include "emsim/io.hpp"
#include "emsim/mesher.hpp"
#include "emsim/postdsl.hpp"
#include "emsim/solver.hpp"

using namespace emsim;

namespace {

struct Case {
  solver::FEProblem problem;
  solver::SolveResult result;
  post::PostProgram program;
};

const Case& fixture(int percent) {
  static std::map<int, Case> cache;
  auto it = cache.find(percent);
  if (it != cache.end()) return it->second;
  std::vector<Point2> centers;
  for (int k = 0; k < 9; ++k) {
    const double a = 2 * std::numbers::pi * k / 9;
    centers.push_back({0.03 * std::cos(a), 0.03 * std::sin(a)});
  }
  const geometry::ConductorLayout layout{centers, 5e-3, 15e-3};
  const auto bnd = geometry::boundary(layout);
  const auto sizes = mesh::scaled(mesh::MeshSizeSpec::defaults(layout, bnd), percent / 100.0);
  Case c;
  c.problem = solver::FEProblem::make(mesh::generate_mesh(layout, bnd, sizes), {}, {});
  c.result = solver::solve(c.problem);
  c.program = post::parse_post(io::read_file(std::filesystem::path(EMSIM_TEST_DATA) / "energy_density_diagonal.pro"));
  return cache.emplace(percent, std::move(c)).first->second;
}

template <auto Fn>
void assemble(benchmark::State& st) {
  const auto& c = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(Fn(c.problem));
  st.counters["triangles"] = static_cast<double>(c.problem.mesh.triangles.size());
}

template <auto Fn>
void fields(benchmark::State& st) {
  const auto& c = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(Fn(c.result, c.problem));
  st.counters["triangles"] = static_cast<double>(c.problem.mesh.triangles.size());
}

template <auto Fn>
void post_eval(benchmark::State& st) {
  const auto& c = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(Fn(c.program, c.result, c.problem));
  st.counters["triangles"] = static_cast<double>(c.problem.mesh.triangles.size());
}

}  // namespace

#define SCALES ->Arg(100)->Arg(50)->Arg(25)->Unit(benchmark::kMillisecond)->UseRealTime()

BENCHMARK(assemble<solver::assemble_serial>)->Name("assemble/serial") SCALES;
BENCHMARK(assemble<solver::assemble>)->Name("assemble/parallel") SCALES;
BENCHMARK(fields<solver::derive_fields_serial>)->Name("derive_fields/serial") SCALES;
BENCHMARK(fields<solver::derive_fields>)->Name("derive_fields/parallel") SCALES;
BENCHMARK(post_eval<post::evaluate_post_serial>)->Name("evaluate_post/serial") SCALES;
BENCHMARK(post_eval<post::evaluate_post>)->Name("evaluate_post/parallel") SCALES;

BENCHMARK_MAIN();
