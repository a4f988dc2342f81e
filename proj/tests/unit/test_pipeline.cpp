#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>

#include "emsim/io.hpp"
#include "emsim/layoutlang.hpp"
#include "emsim/pipeline.hpp"

using namespace emsim;
using namespace emsim::pipeline;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("emsim_pipeline_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

const char* kCircle12 =
    "Run an eddy current simulation model using 12 conductors following the pattern of a circle with radius r = 0.03 m.";
const char* kEverySecond =
    "Run an MQS simulation using 10 conductors that follow the pattern of a circle. Plot the ohmic loss density only "
    "at every second conductor. Provide a summary of the output.";
const char* kHField = "Evaluate the plot of the magnetic vector field of three conductors along the x-axis";
const char* kRectangle =
    "Using nine conductors that are positioned along a rectangle such that one point is at the center (intersection "
    "of the diagonals) and the other eight are distributed along the edges of the rectangle, evaluate the plot of the "
    "magnetic energy density in terms of the magnetic vector potential vector field within the frequency domain only "
    "for the central conductor and the conductors on the first and third bisectors of the rectangle.";

std::vector<Point2> stub_points(const char* prompt) {
  const auto rec = genai::complete({}, {genai::TemplateId::LayoutGen, prompt, ""});
  return layout::evaluate_layout(layout::parse_layout(rec.cleaned));
}

Status status(const WorkflowReport& r, Layer l) { return r.verdict.at(l).status; }

WorkflowOptions coarse() {
  WorkflowOptions o;
  o.mesh_scale = 2.0;
  return o;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("classify maps every outcome to its layer and skips downstream") {
  struct Row {
    Stage stage;
    Outcome outcome;
    Layer layer;
    Status status;
  };
  const Row table[] = {
      {Stage::Layout, Outcome::LayoutParseError, Layer::LayoutSyntax, Status::Failed},
      {Stage::Layout, Outcome::LayoutRuntimeError, Layer::LayoutSemantics, Status::Failed},
      {Stage::Geometry, Outcome::InvalidGeometry, Layer::GeometrySyntax, Status::Failed},
      {Stage::Geometry, Outcome::GeometryViolation, Layer::GeometrySemantics, Status::Failed},
      {Stage::Geometry, Outcome::IntentMismatch, Layer::GeometrySemantics, Status::Failed},
      {Stage::Geometry, Outcome::IntentUnverifiable, Layer::GeometrySemantics, Status::NeedsHuman},
      {Stage::Dsl, Outcome::DslParseError, Layer::DslSyntax, Status::Failed},
      {Stage::Dsl, Outcome::DslResolutionError, Layer::DslSemantics, Status::Failed},
      {Stage::Dsl, Outcome::DslKindError, Layer::PhysicsSyntax, Status::Failed},
      {Stage::Dsl, Outcome::PhysicsLint, Layer::PhysicsSemantics, Status::Failed},
      {Stage::Summary, Outcome::SummaryMalformed, Layer::SummarySyntax, Status::Failed},
      {Stage::Summary, Outcome::SummaryMismatch, Layer::SummarySemantics, Status::Failed},
      {Stage::Summary, Outcome::SummaryUnverifiable, Layer::SummarySemantics, Status::NeedsHuman},
  };
  const Stage order[] = {Stage::Layout, Stage::Geometry, Stage::Dsl, Stage::Summary};
  for (const auto& row : table) {
    CAPTURE(to_string(row.layer));
    std::vector<StageOutcome> outs;
    for (auto s : order) {
      if (s == row.stage) {
        outs.push_back({s, row.outcome, {"diag"}});
        if (row.status == Status::Failed) break;
      } else {
        outs.push_back({s, Outcome::Ok, {}});
      }
    }
    const auto v = classify(outs);
    CHECK(v.at(row.layer).status == row.status);
    CHECK(v.at(row.layer).diagnostics == std::vector<std::string>{"diag"});
    for (std::size_t i = 0; i < kLayerCount; ++i) {
      const auto l = static_cast<Layer>(i);
      if (l == row.layer) continue;
      if (i < static_cast<std::size_t>(row.layer))
        CHECK(v.at(l).status == Status::Ok);
      else if (row.status == Status::Failed)
        CHECK(v.at(l).status == Status::Skipped);
      else
        CHECK(v.at(l).status == Status::Ok);
    }
    CHECK(v.passed() == (row.status != Status::Failed));
  }
}

TEST_CASE("classify never reports ok after a failure") {
  // even when a later stage claims success
  const auto v = classify({{Stage::Layout, Outcome::LayoutParseError, {}},
                           {Stage::Geometry, Outcome::Ok, {}},
                           {Stage::Dsl, Outcome::Ok, {}}});
  CHECK(v.first_failure() == Layer::LayoutSyntax);
  for (std::size_t i = 1; i < kLayerCount; ++i) CHECK(v.layers[i].status == Status::Skipped);
  const auto none = classify({});
  for (const auto& l : none.layers) CHECK(l.status == Status::Skipped);
}

TEST_CASE("intent checks on the stub layouts") {
  struct Row {
    const char* prompt;
    Outcome want;
  };
  const Row rows[] = {
      {kCircle12, Outcome::Ok},
      {"Run an MQS simulation with 10 conductors following the y-axis. The conductors have a radius of 5 mm; ensure "
       "a minimal spacing between them.",
       Outcome::Ok},
      {"Run an MQS simulation with 100 conductors arranged in a 10 x 10 grid using hexagonal packing.", Outcome::Ok},
      {kEverySecond, Outcome::Ok},
      {"Run an initial mqs simulation using only one conductor", Outcome::Ok},
      {"Run a basic mqs simulation using three conductors where one is on the y-axis and the other two are on the "
       "x-axis",
       Outcome::Ok},
      {kHField, Outcome::Ok},
      {"Run a minimal magnetoquasistatic simulation with some initial points", Outcome::IntentUnverifiable},
      {"Run an MQS simulation using 15 conductors forming the outline of the letter \"A\".", Outcome::IntentUnverifiable},
      {"Run an MQS simulation model using 5 conductors placed exactly at all 5 vertices of a square with side length "
       "0.05 m.",
       Outcome::IntentUnverifiable},
      {kRectangle, Outcome::IntentUnverifiable},
  };
  for (const auto& r : rows) {
    CAPTURE(r.prompt);
    const auto c = check_intent(r.prompt, stub_points(r.prompt));
    CHECK(c.outcome == r.want);
  }
}

TEST_CASE("intent mismatches are caught") {
  std::vector<Point2> ring;
  for (int i = 0; i < 12; ++i) {
    const double t = 2 * std::numbers::pi * i / 12;
    ring.push_back({0.03 * std::cos(t), 0.03 * std::sin(t)});
  }
  CHECK(check_intent(kCircle12, ring).outcome == Outcome::Ok);
  auto eleven = ring;
  eleven.pop_back();
  CHECK(check_intent(kCircle12, eleven).outcome == Outcome::IntentMismatch);
  auto wide = ring;
  for (auto& p : wide) p = 1.5 * p;
  const auto c = check_intent(kCircle12, wide);
  CHECK(c.outcome == Outcome::IntentMismatch);
  REQUIRE(!c.diagnostics.empty());
  CHECK(c.diagnostics[0].find("radius") != std::string::npos);
  auto bent = ring;
  bent[3].x += 1e-3;
  CHECK(check_intent(kCircle12, bent).outcome == Outcome::IntentMismatch);
  CHECK(check_intent("three conductors along the x-axis", {{0, 0}, {0.02, 0}, {0.04, 0.001}}).outcome ==
        Outcome::IntentMismatch);
  CHECK(check_intent("a 2 x 3 grid", {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}}).outcome ==
        Outcome::IntentMismatch);
  CHECK(check_intent("a 2 x 3 grid", {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}}).outcome == Outcome::Ok);
}

TEST_CASE("stub circle run passes every machine-checked layer and writes the session files") {
  TempDir tmp;
  const auto s = Session::create(tmp.path);
  CHECK(Session::valid_id(s.id()));
  const auto r = run_workflow(s, kEverySecond, Mode::WithPostAndSummary, coarse());
  CHECK(!r.provider_error);
  for (const auto& l : r.verdict.layers) {
    CAPTURE(to_string(l.layer));
    CHECK(l.status == (l.layer == Layer::SummarySemantics ? Status::NeedsHuman : Status::Ok));
  }
  CHECK(r.verdict.passed());
  REQUIRE(r.facts);
  CHECK(r.facts->conductor_count == 10);
  CHECK(r.facts->total_loss > 0);
  REQUIRE(r.summary);
  CHECK(r.summary->find("10 conductors") != std::string::npos);
  CHECK(r.summary->find("1, 3, 5, 7 and 9") != std::string::npos);
  CHECK(r.completions.size() == 3);

  for (const char* f : {"layout.json", "mesh.json", "solution.json", "report.json", "messages.jsonl",
                        "completions.jsonl", "Results/fields.vtk", "Results/fields.json",
                        "Results/p_V_every_second.vtk", "Results/p_V_every_second.json"})
    CHECK_MESSAGE(fs::exists(s.dir() / f), f);

  std::vector<std::string> paths;
  for (const auto& a : r.artifacts) {
    paths.push_back(a.path);
    const auto bytes = io::read_file(s.dir() / a.path);
    CHECK(a.bytes == bytes.size());
    CHECK(a.fnv1a == io::hex64(io::fnv1a(bytes)));
  }
  CHECK(std::is_sorted(paths.begin(), paths.end()));

  const auto j = json::parse(io::read_file(s.dir() / "report.json"));
  CHECK(j["schema_version"] == 1);
  CHECK(j["verdict"]["passed"] == true);
  CHECK(j["mode"] == "with_post_and_summary");
  CHECK(j.dump().find(s.id()) == std::string::npos);

  // reopen by id
  const auto again = Session::open(tmp.path, s.id());
  CHECK(again.dir() == s.dir());
  CHECK_THROWS_AS(Session::open(tmp.path, "../etc"), io::FileError);
  CHECK_THROWS_AS(Session::open(tmp.path, "ffffffffffffffff"), io::FileError);
}

TEST_CASE("stub runs are byte-identical across sessions") {
  TempDir tmp;
  const auto a = Session::create(tmp.path);
  const auto b = Session::create(tmp.path);
  CHECK(a.id() != b.id());
  run_workflow(a, kCircle12, Mode::WithPostAndSummary, coarse());
  run_workflow(b, kCircle12, Mode::WithPostAndSummary, coarse());
  CHECK(io::read_file(a.dir() / "report.json") == io::read_file(b.dir() / "report.json"));
  CHECK(io::read_file(a.dir() / "Results/fields.vtk") == io::read_file(b.dir() / "Results/fields.vtk"));
}

TEST_CASE("layout only mode stops after the solve") {
  TempDir tmp;
  const auto s = Session::create(tmp.path);
  const auto r = run_workflow(s, "Run an initial mqs simulation using only one conductor", Mode::LayoutOnly, coarse());
  CHECK(status(r, Layer::GeometrySemantics) == Status::Ok);
  CHECK(status(r, Layer::DslSyntax) == Status::Skipped);
  CHECK(status(r, Layer::SummarySemantics) == Status::Skipped);
  CHECK(r.verdict.passed());
  REQUIRE(r.facts);
  CHECK(r.facts->conductor_count == 1);
  CHECK(r.completions.size() == 1);
}

TEST_CASE("broken DSL fails dsl_syntax after a completed solve") {
  TempDir tmp;
  const auto s = Session::create(tmp.path);
  auto o = coarse();
  o.dsl_examples = false;
  const auto r = run_workflow(s, kHField, Mode::WithPostAndSummary, o);
  CHECK(r.verdict.first_failure() == Layer::DslSyntax);
  CHECK(status(r, Layer::GeometrySemantics) == Status::Ok);
  for (auto l : {Layer::DslSemantics, Layer::PhysicsSyntax, Layer::PhysicsSemantics, Layer::SummarySyntax,
                 Layer::SummarySemantics})
    CHECK(status(r, l) == Status::Skipped);
  CHECK(r.facts);
  CHECK(!r.summary);
  CHECK(fs::exists(s.dir() / "solution.json"));

  // the same prompt with examples produces a working program
  const auto s2 = Session::create(tmp.path);
  const auto ok = run_workflow(s2, kHField, Mode::WithPost, coarse());
  CHECK(ok.verdict.passed());
  CHECK(status(ok, Layer::PhysicsSemantics) == Status::Ok);
}

TEST_CASE("wrong energy factor fails physics_semantics") {
  TempDir tmp;
  const auto s = Session::create(tmp.path);
  auto o = coarse();
  o.dsl_examples = false;
  const auto r = run_workflow(s, kRectangle, Mode::WithPostAndSummary, o);
  CHECK(status(r, Layer::GeometrySemantics) == Status::NeedsHuman);
  CHECK(status(r, Layer::PhysicsSyntax) == Status::Ok);
  CHECK(r.verdict.first_failure() == Layer::PhysicsSemantics);
  const auto& d = r.verdict.at(Layer::PhysicsSemantics).diagnostics;
  REQUIRE(!d.empty());
  CHECK(d[0].find("0.5") != std::string::npos);
  CHECK(!r.summary);
}

TEST_CASE("layout failures are classified") {
  TempDir tmp;
  auto o = coarse();
  o.provider.extra_fixtures = {
      {genai::TemplateId::LayoutGen, "broken syntax", "for i in 0..3 {\n  emit point(i, 0\n}"},
      {genai::TemplateId::LayoutGen, "divide by zero", "let z = 0\nemit point(1 / z, 0)"},
      {genai::TemplateId::LayoutGen, "overlapping pair", "emit point(0, 0)\nemit point(0.004, 0)"},
      {genai::TemplateId::LayoutGen, "nothing at all", "let q = 1"},
      {genai::TemplateId::LayoutGen, "place 3 conductors", "emit point(0, 0)\nemit point(0.02, 0)"},
  };
  struct Row {
    const char* prompt;
    Layer layer;
  };
  for (const Row row : {Row{"broken syntax", Layer::LayoutSyntax}, Row{"divide by zero", Layer::LayoutSemantics},
                        Row{"overlapping pair", Layer::GeometrySemantics}, Row{"nothing at all", Layer::GeometrySyntax},
                        Row{"place 3 conductors", Layer::GeometrySemantics}}) {
    CAPTURE(row.prompt);
    const auto s = Session::create(tmp.path);
    const auto r = run_workflow(s, row.prompt, Mode::WithPostAndSummary, o);
    CHECK(r.verdict.first_failure() == row.layer);
    CHECK(!r.verdict.at(row.layer).diagnostics.empty());
    CHECK(!r.facts);
    CHECK(fs::exists(s.dir() / "report.json"));
  }
}

TEST_CASE("provider errors are reported, not thrown") {
  TempDir tmp;
  ::unsetenv("EMSIM_PIPELINE_NO_KEY");
  auto o = coarse();
  o.provider.kind = genai::ProviderKind::Http;
  o.provider.api_key_env = "EMSIM_PIPELINE_NO_KEY";
  int calls = 0;
  o.transport = [&](const genai::HttpRequest&) {
    ++calls;
    return genai::HttpResponse{500, ""};
  };
  const auto s = Session::create(tmp.path);
  const auto r = run_workflow(s, kCircle12, Mode::WithPost, o);
  REQUIRE(r.provider_error);
  CHECK(r.provider_error->rfind("AuthMissing", 0) == 0);
  CHECK(calls == 0);
  for (const auto& l : r.verdict.layers) CHECK(l.status == Status::Skipped);
}

}  // TEST_SUITE
