// Acceptance report: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Oracles below are written against the math, not against
// the solver's own helpers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "emsim/genai.hpp"
#include "emsim/geometry.hpp"
#include "emsim/io.hpp"
#include "emsim/layoutlang.hpp"
#include "emsim/mesher.hpp"
#include "emsim/pipeline.hpp"
#include "emsim/postdsl.hpp"
#include "emsim/solver.hpp"

using namespace emsim;
using cplx = std::complex<double>;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSigma = 58.1e6;
constexpr double kRc = 5e-3;
constexpr double kMu = 4e-7 * kPi;

int failures = 0;

void line(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %-26s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... v) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, v...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------------------------ oracles

// J_n(z) by its power series; |z| stays below ~5 here, where it converges fast.
cplx bessel_j(int n, cplx z) {
  cplx term = std::pow(z / 2.0, n);
  for (int k = 1; k <= n; ++k) term /= static_cast<double>(k);
  cplx sum = term;
  const cplx q = -(z * z) / 4.0;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<double>(m) * static_cast<double>(m + n));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// Internal per-unit-length resistance of a round wire: Re of k J0(ka) / (2 pi a sigma J1(ka)), k^2 = -j w mu sigma.
double kelvin_r_ac(double f, double a, double sigma) {
  if (f == 0.0) return 1.0 / (sigma * kPi * a * a);
  const double w = 2 * kPi * f;
  const cplx k = std::sqrt(cplx(0.0, -w * kMu * sigma));
  const cplx z = k * bessel_j(0, k * a) / (2 * kPi * a * sigma * bessel_j(1, k * a));
  return z.real();
}

std::array<Point2, 3> corners(const mesh::TriMesh& m, std::size_t t) {
  const auto& v = m.triangles[t].v;
  return {m.nodes[v[0]], m.nodes[v[1]], m.nodes[v[2]]};
}

double tri_area(const std::array<Point2, 3>& p) {
  return 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y));
}

// Nodal E_z = -j w A - u on a conductor triangle.
std::array<cplx, 3> nodal_e(const solver::SolveResult& r, const solver::FEProblem& pb, std::size_t t, int cond) {
  const double w = pb.excitation.angular_frequency();
  std::array<cplx, 3> e;
  for (int k = 0; k < 3; ++k) e[k] = cplx(0, -w) * r.a_z[pb.mesh.triangles[t].v[k]] - r.u[cond];
  return e;
}

int conductor_of(const mesh::TriMesh& m, std::size_t t) {
  const int tag = m.triangles[t].tag;
  return tag >= 1 && tag <= m.conductor_count() ? tag - 1 : -1;
}

struct Independent {
  std::vector<cplx> current;  // integral of sigma E_z per conductor
  std::vector<double> loss;   // 1/2 sigma integral |E_z|^2, exact for P1
  double energy = 0.0;        // nu/4 sum |B|^2 area
};

Independent integrate(const solver::SolveResult& r, const solver::FEProblem& pb) {
  const auto& m = pb.mesh;
  const int n = m.conductor_count();
  const double sigma = pb.material.conductivity_S_per_m;
  Independent out{std::vector<cplx>(n), std::vector<double>(n, 0.0), 0.0};
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto p = corners(m, t);
    const double area = tri_area(p);
    // gradient of the P1 interpolant of A
    const auto& v = m.triangles[t].v;
    const double det = 2 * area;
    const cplx a0 = r.a_z[v[0]], a1 = r.a_z[v[1]], a2 = r.a_z[v[2]];
    const cplx dx = ((a1 - a0) * (p[2].y - p[0].y) - (a2 - a0) * (p[1].y - p[0].y)) / det;
    const cplx dy = ((a2 - a0) * (p[1].x - p[0].x) - (a1 - a0) * (p[2].x - p[0].x)) / det;
    out.energy += 0.25 * pb.material.reluctivity * (std::norm(dx) + std::norm(dy)) * area;

    const int c = conductor_of(m, t);
    if (c < 0) continue;
    const auto e = nodal_e(r, pb, t, c);
    out.current[c] += sigma * area * (e[0] + e[1] + e[2]) / 3.0;
    // e^H M e with the P1 mass matrix area/12 [[2,1,1],[1,2,1],[1,1,2]]
    const double quad = (std::norm(e[0]) + std::norm(e[1]) + std::norm(e[2]) + std::norm(e[0] + e[1] + e[2])) * area / 12.0;
    out.loss[c] += 0.5 * sigma * quad;
  }
  return out;
}

// Power balance, checked on every solve in this program.
double worst_balance = 0.0;
int balance_cases = 0;

struct Solved {
  solver::FEProblem problem;
  solver::SolveResult result;
  Independent ind;
};

Solved solve_case(const geometry::ConductorLayout& layout, double f, double mesh_scale = 1.0,
                  const std::vector<cplx>& currents = {}) {
  Solved s;
  const auto bnd = geometry::boundary(layout);
  const auto sizes = mesh::scaled(mesh::MeshSizeSpec::defaults(layout, bnd), mesh_scale);
  geometry::ExcitationSpec ex;
  ex.frequency_Hz = f;
  s.problem = solver::FEProblem::make(mesh::generate_mesh(layout, bnd, sizes), {}, ex);
  if (!currents.empty()) s.problem.currents = currents;
  s.result = solver::solve(s.problem);
  s.ind = integrate(s.result, s.problem);

  double loss = 0.0;
  cplx terminal = 0.0;
  for (std::size_t i = 0; i < s.ind.loss.size(); ++i) {
    loss += s.ind.loss[i];
    terminal += std::conj(s.result.u[i]) * s.problem.currents[i];
  }
  // E_z = -j w A - u and integral J_z = +I give loss = -1/2 Re sum conj(u_i) I_i
  const double predicted = -0.5 * terminal.real();
  worst_balance = std::max(worst_balance, std::abs(loss - predicted) / std::abs(predicted));
  ++balance_cases;
  return s;
}

geometry::ConductorLayout single() { return {{{0.0, 0.0}}, kRc, 3 * kRc}; }

// ------------------------------------------------------------------ criteria

void skin_effect() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = solve_case(single(), 50.0);
  const auto report = solver::conductor_report(s.result, s.problem);
  const double elapsed = seconds_since(t0);
  const double r_fe = 2 * report[0].loss / std::norm(s.problem.currents[0]);
  const double r_ex = kelvin_r_ac(50.0, kRc, kSigma);
  const double err = std::abs(r_fe - r_ex) / r_ex;
  const auto tris = s.problem.mesh.triangles.size();
  line(err <= 0.01 && tris <= 20000 && elapsed <= 10.0, "skin_effect_oracle",
       fmt("R_AC %.6e vs Bessel %.6e Ohm/m, rel err %.3f%% (<= 1%%); %zu triangles (<= 20000); %.2f s (<= 10 s)", r_fe,
           r_ex, 100 * err, tris, elapsed));
}

std::vector<Point2> random_layout(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> pos(-0.04, 0.04);
  std::vector<Point2> pts;
  while (static_cast<int>(pts.size()) < n) {
    const Point2 p{pos(rng), pos(rng)};
    bool ok = true;
    for (const auto& q : pts) ok = ok && distance(p, q) > 2 * kRc + 1e-3;
    if (ok) pts.push_back(p);
  }
  return pts;
}

void constraint_exactness() {
  double worst = 0.0;
  int total = 0;
  for (int seed = 1; seed <= 25; ++seed) {
    std::mt19937_64 rng(seed);
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    const double f = std::uniform_real_distribution<double>(10.0, 2000.0)(rng);
    std::vector<cplx> currents;
    for (int i = 0; i < n; ++i)
      currents.push_back(std::polar(std::uniform_real_distribution<double>(0.5, 2.0)(rng),
                                    std::uniform_real_distribution<double>(-kPi, kPi)(rng)));
    const auto s = solve_case({random_layout(rng, n), kRc, 3 * kRc}, f, 1.0, currents);
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(s.ind.current[i] - currents[i]) / std::abs(currents[i]));
      ++total;
    }
  }
  line(worst <= 1e-8, "constraint_exactness",
       fmt("25 random layouts, %d conductors, worst |int J - I|/|I| = %.2e (<= 1e-8)", total, worst));
}

std::vector<Point2> ring(int n, double r) {
  std::vector<Point2> p;
  for (int k = 0; k < n; ++k) p.push_back({r * std::cos(2 * kPi * k / n), r * std::sin(2 * kPi * k / n)});
  return p;
}

std::string post_program(const std::string& name, const std::string& expr, const std::string& regions) {
  return "PostProcessing {\n  { Name P; NameOfFormulation MagDyn_a;\n    PostQuantity {\n      { Name " + name +
         "; Value { Local { [ " + expr + " ]; In Region[{" + regions +
         "}]; Jacobian Vol; } } }\n    }\n  }\n}\nPostOperation {\n  { Name O; NameOfPostProcessing P;\n    Operation {\n"
         "      Print[ " + name + ", OnElementsOf Omega, File \"Results/" + name + ".pos\" ];\n    }\n  }\n}\n";
}

void dsl_cross_check() {
  const auto s = solve_case({ring(7, 0.03), kRc, 3 * kRc}, 500.0);
  const auto& m = s.problem.mesh;
  const auto report = solver::conductor_report(s.result, s.problem);

  const auto loss_prog = post::parse_post(
      post_program("p", "sigma[]/2 * Norm[ (- Dt[{a}] - {grad_phi}) ]^2", "Omega_c"));
  const auto loss_vals = post::evaluate_post(loss_prog, s.result, s.problem);
  std::vector<double> per(report.size(), 0.0);
  for (std::size_t t = 0; t < m.triangles.size(); ++t)
    if (loss_vals[0].in_region[t]) per[conductor_of(m, t)] += loss_vals[0].values[t][0].real() * m.area(t);
  double worst_loss = 0.0;
  for (std::size_t i = 0; i < per.size(); ++i)
    worst_loss = std::max(worst_loss, std::abs(per[i] - report[i].loss) / report[i].loss);

  const auto energy_prog = post::parse_post(post_program("w", "0.25 * nu[] * Norm[{d a}]^2", "Omega"));
  const auto energy_vals = post::evaluate_post(energy_prog, s.result, s.problem);
  double w = 0.0;
  for (std::size_t t = 0; t < m.triangles.size(); ++t)
    if (energy_vals[0].in_region[t]) w += energy_vals[0].values[t][0].real() * m.area(t);
  const double energy_err = std::abs(w - s.ind.energy) / s.ind.energy;

  line(worst_loss <= 1e-10 && energy_err <= 1e-12, "dsl_integral_cross_check",
       fmt("7-ring at 500 Hz: loss density vs conductor report worst %.2e (<= 1e-10); energy %.6e J/m vs "
           "re-summed %.6e, rel %.2e (<= 1e-12)",
           worst_loss, w, s.ind.energy, energy_err));
}

void dc_limit() {
  double worst_spread = 0.0, worst_loss = 0.0;
  for (const auto& layout : {single(), geometry::ConductorLayout{ring(3, 0.02), kRc, 3 * kRc}}) {
    const auto s = solve_case(layout, 0.0);
    const auto fields = solver::derive_fields(s.result, s.problem);
    const int n = s.problem.mesh.conductor_count();
    for (int c = 0; c < n; ++c) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t t = 0; t < fields.jz.size(); ++t) {
        if (conductor_of(s.problem.mesh, t) != c) continue;
        lo = std::min(lo, fields.jz[t].real());
        hi = std::max(hi, fields.jz[t].real());
      }
      worst_spread = std::max(worst_spread, (hi - lo) / std::abs(0.5 * (hi + lo)));
      const double closed = 0.5 * std::norm(s.problem.currents[c]) / (kSigma * kPi * kRc * kRc);
      worst_loss = std::max(worst_loss, std::abs(s.ind.loss[c] - closed) / closed);
    }
  }
  line(worst_spread <= 1e-10 && worst_loss <= 0.005, "dc_limit",
       fmt("J_z spread %.2e (<= 1e-10); loss vs I^2/(2 sigma pi r^2) rel %.3f%% (<= 0.5%%)", worst_spread,
           100 * worst_loss));
}

void convergence() {
  const double r_ex = kelvin_r_ac(50.0, kRc, kSigma);
  std::vector<double> errs;
  std::string detail;
  for (double scale : {1.0, 0.5, 0.25}) {
    const auto s = solve_case(single(), 50.0, scale);
    double loss = 0.0;
    for (double l : s.ind.loss) loss += l;
    const double r_fe = 2 * loss / std::norm(s.problem.currents[0]);
    errs.push_back(std::abs(r_fe - r_ex) / r_ex);
    detail += fmt("h x%.2f: %zu tris, err %.3e; ", scale, s.problem.mesh.triangles.size(), errs.back());
  }
  const bool mono = errs[1] < errs[0] && errs[2] < errs[1];
  line(mono, "convergence", detail + (mono ? "monotone" : "not monotone"));
}

std::string read_data(const char* name) { return io::read_file(fs::path(EMSIM_TEST_DATA) / name); }

bool has(const std::vector<post::Diagnostic>& ds, const std::string& layer, const std::string& text) {
  for (const auto& d : ds)
    if (d.layer == layer && d.message.find(text) != std::string::npos) return true;
  return false;
}

void parser_corpus() {
  struct Listing {
    const char* file;
    int conductors;
  };
  bool clean = true;
  int mutations = 0, located = 0;
  for (const Listing l : {Listing{"loss_density_conductor_4.pro", 7}, Listing{"energy_density_diagonal.pro", 9}}) {
    const auto src = read_data(l.file);
    try {
      const auto prog = post::parse_post(src);
      clean = clean && post::validate_post(prog, post::region_names(l.conductors)).empty() &&
              post::physics_lint(prog).empty();
    } catch (const Error&) {
      clean = false;
    }
    bool in_string = false;
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (src[i] == '"') in_string = !in_string;
      if (in_string || std::string_view("{}[]()").find(src[i]) == std::string_view::npos) continue;
      // delete the bracket, then double it
      for (int kind = 0; kind < 2; ++kind) {
        std::string m = src;
        if (kind == 0)
          m.erase(i, 1);
        else
          m.insert(i, 1, src[i]);
        ++mutations;
        try {
          post::parse_post(m);
        } catch (const post::DslSyntaxError& e) {
          if (e.loc().line >= 1 && e.loc().column >= 1) ++located;
        }
      }
    }
  }
  auto energy = read_data("energy_density_diagonal.pro");
  energy.replace(energy.find("0.25"), 4, "0.5");
  const auto lint = post::physics_lint(post::parse_post(energy));
  const bool factor = has(lint, "physics_semantics", "factor 0.5 vs. 0.25");
  line(clean && located == mutations && factor, "parser_corpus",
       fmt("listings clean: %s; %d/%d bracket mutations give a located DslSyntaxError; factor-0.5 diagnostic: %s",
           clean ? "yes" : "no", located, mutations, factor ? "yes" : "no"));
}

std::vector<Point2> stub_layout(const char* prompt) {
  const auto rec = genai::complete({}, {genai::TemplateId::LayoutGen, prompt, ""});
  return layout::evaluate_layout(layout::parse_layout(rec.cleaned));
}

const char* kPromptA =
    "Run an eddy current simulation model using 12 conductors following the pattern of a circle with radius r = 0.03 m.";
const char* kPromptC = "Run an MQS simulation with 100 conductors arranged in a 10 x 10 grid using hexagonal packing.";
const char* kPromptJ =
    "Run an MQS simulation using 10 conductors that follow the pattern of a circle. Plot the ohmic loss density only "
    "at every second conductor. Provide a summary of the output.";

void layout_corpus() {
  std::vector<Point2> hex;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) hex.push_back({i * 0.02, j * 0.02 + (i % 2) * 0.01});
  struct Case {
    const char* tag;
    const char* prompt;
    std::vector<Point2> expected;
  };
  const Case cases[] = {{"(a)", kPromptA, ring(12, 0.03)}, {"(c)", kPromptC, hex}, {"(j)", kPromptJ, ring(10, 0.02)}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const auto pts = stub_layout(c.prompt);
    double dev = pts.size() == c.expected.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min(pts.size(), c.expected.size()); ++i)
      dev = std::max({dev, std::abs(pts[i].x - c.expected[i].x), std::abs(pts[i].y - c.expected[i].y)});
    const bool free = geometry::check_overlap({pts, kRc, 3 * kRc}).empty();
    ok = ok && dev <= 1e-12 && free;
    detail += fmt("%s %zu/%zu pts, max dev %.1e, %s; ", c.tag, pts.size(), c.expected.size(), dev,
                  free ? "overlap-free" : "OVERLAP");
  }
  line(ok, "layout_corpus", detail + "(<= 1e-12)");
}

void classifier_table() {
  using pipeline::Layer;
  using pipeline::Status;
  const fs::path root = fs::temp_directory_path() / ("emsim_accept_" + std::to_string(std::random_device{}()));
  pipeline::WorkflowOptions o;
  o.mesh_scale = 2.0;
  auto dsl = [](const std::string& expr, const std::string& regions) { return post_program("q", expr, regions); };
  const std::string three = "emit point(-0.02, 0)\nemit point(0, 0)\nemit point(0.02, 0)";
  using genai::TemplateId;
  o.provider.extra_fixtures = {
      {TemplateId::LayoutGen, "cell layout syntax", "emit point(0, 0"},
      {TemplateId::LayoutGen, "cell layout semantics", "let z = 0\nemit point(1 / z, 0)"},
      {TemplateId::LayoutGen, "cell geometry syntax", "let unused = 1"},
      {TemplateId::LayoutGen, "cell geometry overlap", "emit point(0, 0)\nemit point(0.006, 0)"},
      {TemplateId::LayoutGen, "cell intent with 4 conductors", three},
      {TemplateId::LayoutGen, "cell dsl syntax with 3 conductors", three},
      {TemplateId::DslWithExamples, "cell dsl syntax with 3 conductors", "PostProcessing { { Name P; NameOfFormulation MagDyn_a; "},
      {TemplateId::LayoutGen, "cell dsl semantics with 3 conductors", three},
      {TemplateId::DslWithExamples, "cell dsl semantics with 3 conductors", dsl("sigma[]/2 * Norm[ (- Dt[{a}] - {grad_phi}) ]^2", "Omega_c_9")},
      {TemplateId::LayoutGen, "cell physics syntax with 3 conductors", three},
      {TemplateId::DslWithExamples, "cell physics syntax with 3 conductors", dsl("Norm[{a}] + {d a}", "Omega")},
      {TemplateId::LayoutGen, "cell physics semantics with 3 conductors", three},
      {TemplateId::DslWithExamples, "cell physics semantics with 3 conductors", dsl("0.5 * nu[] * Norm[{d a}]^2", "Omega")},
  };
  struct Cell {
    const char* name;
    std::string prompt;
    std::optional<Layer> failed;
    std::optional<Layer> human;
  };
  const std::string prompt_g =
      "Run an MQS simulation model using 5 conductors placed exactly at all 5 vertices of a square with side length "
      "0.05 m.";
  const std::string prompt_h = "Run an MQS simulation using 15 conductors forming the outline of the letter \"A\".";
  const Cell cells[] = {
      {"layout_syntax", "cell layout syntax", Layer::LayoutSyntax, {}},
      {"layout_semantics", "cell layout semantics", Layer::LayoutSemantics, {}},
      {"geometry_syntax", "cell geometry syntax", Layer::GeometrySyntax, {}},
      {"geometry_overlap", "cell geometry overlap", Layer::GeometrySemantics, {}},
      {"geometry_intent", "cell intent with 4 conductors", Layer::GeometrySemantics, {}},
      {"dsl_syntax", "cell dsl syntax with 3 conductors", Layer::DslSyntax, {}},
      {"dsl_semantics", "cell dsl semantics with 3 conductors", Layer::DslSemantics, {}},
      {"physics_syntax", "cell physics syntax with 3 conductors", Layer::PhysicsSyntax, {}},
      {"physics_semantics", "cell physics semantics with 3 conductors", Layer::PhysicsSemantics, {}},
      {"all_ok", kPromptA, {}, {}},
      {"needs_human_g", prompt_g, {}, Layer::GeometrySemantics},
      {"needs_human_h", prompt_h, {}, Layer::GeometrySemantics},
  };
  int good = 0;
  std::string bad;
  for (const auto& c : cells) {
    const auto s = pipeline::Session::create(root);
    const auto r = pipeline::run_workflow(s, c.prompt, pipeline::Mode::WithPost, o);
    bool ok = r.verdict.first_failure() == c.failed && !r.provider_error;
    const auto last = c.failed ? static_cast<std::size_t>(*c.failed) : static_cast<std::size_t>(Layer::PhysicsSemantics);
    for (std::size_t i = 0; i < pipeline::kLayerCount; ++i) {
      const auto& l = r.verdict.layers[i];
      Status want = Status::Ok;
      if (i > last) want = Status::Skipped;
      if (c.failed && l.layer == *c.failed) want = Status::Failed;
      if (c.human && l.layer == *c.human) want = Status::NeedsHuman;
      ok = ok && l.status == want;
    }
    if (c.failed) ok = ok && !r.verdict.at(*c.failed).diagnostics.empty();
    good += ok;
    if (!ok) bad += std::string(" ") + c.name;
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  line(good == static_cast<int>(std::size(cells)), "classifier_table",
       fmt("%d/%zu verdict cells match exactly (failed layer, downstream skipped, needs_human for the square and "
           "letter prompts)%s%s",
           good, std::size(cells), bad.empty() ? "" : "; wrong:", bad.c_str()));
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / ("emsim_accept_det_" + std::to_string(std::random_device{}()));
  pipeline::WorkflowOptions o;
  o.mesh_scale = 2.0;
  const auto a = pipeline::Session::create(root);
  const auto b = pipeline::Session::create(root);
  const auto ra = pipeline::run_workflow(a, kPromptJ, pipeline::Mode::WithPostAndSummary, o);
  const auto rb = pipeline::run_workflow(b, kPromptJ, pipeline::Mode::WithPostAndSummary, o);
  const bool same_report = io::read_file(a.dir() / "report.json") == io::read_file(b.dir() / "report.json");
  bool same_manifest = ra.artifacts.size() == rb.artifacts.size() && !ra.artifacts.empty();
  for (std::size_t i = 0; same_manifest && i < ra.artifacts.size(); ++i)
    same_manifest = ra.artifacts[i].path == rb.artifacts[i].path && ra.artifacts[i].fnv1a == rb.artifacts[i].fnv1a &&
                    ra.artifacts[i].bytes == rb.artifacts[i].bytes;
  std::error_code ec;
  fs::remove_all(root, ec);
  line(same_report && same_manifest, "determinism",
       fmt("two stub runs: report.json %s, manifest of %zu artifacts %s", same_report ? "byte-identical" : "DIFFERS",
           ra.artifacts.size(), same_manifest ? "identical" : "DIFFERS"));
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void()>> steps[] = {
      {"skin_effect_oracle", skin_effect},   {"constraint_exactness", constraint_exactness},
      {"dsl_integral_cross_check", dsl_cross_check}, {"dc_limit", dc_limit},
      {"convergence", convergence},          {"parser_corpus", parser_corpus},
      {"layout_corpus", layout_corpus},      {"classifier_table", classifier_table},
      {"determinism", determinism},
  };
  for (const auto& [name, fn] : steps) {
    try {
      fn();
    } catch (const std::exception& e) {
      line(false, name, std::string("threw: ") + e.what());
    }
  }
  line(worst_balance <= 1e-6 && balance_cases > 0, "power_balance",
       fmt("%d solves, worst |loss + 1/2 Re sum conj(u) I| / loss = %.2e (<= 1e-6)", balance_cases, worst_balance));
  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
