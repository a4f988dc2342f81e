#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>

#include "emsim/io.hpp"
#include "emsim/layoutlang.hpp"
#include "emsim/mesher.hpp"
#include "emsim/pipeline.hpp"
#include "emsim/postdsl.hpp"

namespace fs = std::filesystem;

namespace emsim::pipeline {

// ------------------------------------------------------------------ sessions

Session::Session(std::string id, fs::path dir)
    : id_(std::move(id)), dir_(std::move(dir)), mutex_(std::make_shared<std::mutex>()) {}

bool Session::valid_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'; });
}

Session Session::create(const fs::path& root) {
  std::random_device rd;
  std::mt19937_64 gen((static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
                      static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::error_code ec;
  fs::create_directories(root, ec);
  for (int attempt = 0; attempt < 16; ++attempt) {
    const std::string id = io::hex64(gen());
    const fs::path dir = root / id;
    if (fs::create_directory(dir, ec)) return Session(id, dir);
    if (ec) throw io::FileError("cannot create session directory " + dir.string() + ": " + ec.message());
  }
  throw io::FileError("cannot allocate a session id under " + root.string());
}

Session Session::open(const fs::path& root, const std::string& id) {
  if (!valid_id(id)) throw io::FileError("malformed session id");
  const fs::path dir = root / id;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw io::FileError("unknown session " + id);
  return Session(id, dir);
}

namespace {

void append_line(const fs::path& path, const json& j) {
  std::ofstream os(path, std::ios::app | std::ios::binary);
  os << j.dump() << '\n';
  os.flush();
  if (!os) throw io::FileError("cannot append to " + path.string());
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void Session::append_message(const json& message) const { append_line(dir_ / "messages.jsonl", message); }

void Session::append_completion(const genai::CompletionRecord& c) const {
  append_line(dir_ / "completions.jsonl",
              {{"template", genai::to_string(c.id)},
               {"provider", c.provider == genai::ProviderKind::Stub ? "stub" : "http"},
               {"prompt", c.prompt},
               {"raw", c.raw},
               {"cleaned", c.cleaned},
               {"latency_ms", c.latency_ms},
               {"timestamp", c.timestamp},
               {"attempts", c.attempts},
               {"retry_log", c.retry_log}});
}

// ------------------------------------------------------------------ workflow

namespace {

struct Run {
  const Session& session;
  const WorkflowOptions& options;
  WorkflowReport report;
  std::vector<StageOutcome> outcomes;
  std::vector<std::string> written;  // session-relative

  void write(const std::string& rel, std::string_view content) {
    io::write_file_atomic(session.dir() / rel, content);
    written.push_back(rel);
  }

  // nullopt when the provider failed; the error is recorded in the report
  std::optional<genai::CompletionRecord> call(genai::TemplateId id, const std::string& input) {
    try {
      const auto prompt = genai::render_prompt(genai::builtin_template(id), input);
      auto rec = genai::complete(options.provider, {id, input, prompt}, options.transport);
      session.append_completion(rec);
      report.completions.push_back(rec);
      return rec;
    } catch (const io::FileError&) {
      throw;
    } catch (const Error& e) {
      report.provider_error = e.kind() + ": " + e.what();
      return std::nullopt;
    }
  }

  void fail(Stage s, Outcome o, std::vector<std::string> diags) { outcomes.push_back({s, o, std::move(diags)}); }
};

std::string where(const Error& e) { return e.kind() + ": " + e.what(); }

std::vector<std::string> summary_syntax_problems(const std::string& s) {
  std::vector<std::string> out;
  if (s.find_first_not_of(" \t\r\n") == std::string::npos) out.push_back("summary is empty");
  if (s.find("```") != std::string::npos) out.push_back("summary contains a code fence");
  if (s.find("{stage_output}") != std::string::npos || s.find("{user_input}") != std::string::npos)
    out.push_back("summary contains an unfilled template placeholder");
  for (unsigned char c : s)
    if (c < 0x20 && c != '\n' && c != '\t' && c != '\r') {
      out.push_back("summary contains control characters");
      break;
    }
  return out;
}

}  // namespace

WorkflowReport run_workflow(const Session& session, const std::string& prompt, Mode mode,
                            const WorkflowOptions& options) {
  std::lock_guard lock(session.run_mutex());
  Run run{session, options, {}, {}, {}};
  run.report.mode = mode;
  run.report.prompt = prompt;
  session.append_message({{"role", "user"}, {"content", prompt}, {"mode", to_string(mode)}, {"timestamp", now_utc()}});

  auto finish = [&]() -> WorkflowReport {
    run.report.verdict = classify(run.outcomes);
    std::sort(run.written.begin(), run.written.end());
    run.written.erase(std::unique(run.written.begin(), run.written.end()), run.written.end());
    for (const auto& rel : run.written) {
      const auto bytes = io::read_file(session.dir() / rel);
      run.report.artifacts.push_back({rel, bytes.size(), io::hex64(io::fnv1a(bytes))});
    }
    io::write_file_atomic(session.dir() / "report.json", report_to_json(run.report).dump(2) + "\n");
    const auto ff = run.report.verdict.first_failure();
    session.append_message({{"role", "assistant"},
                            {"content", run.report.summary.value_or("")},
                            {"first_failure", ff ? json(to_string(*ff)) : json(nullptr)},
                            {"provider_error", run.report.provider_error ? json(*run.report.provider_error) : json(nullptr)},
                            {"timestamp", now_utc()}});
    return run.report;
  };

  // ---- layout
  const auto layout_rec = run.call(genai::TemplateId::LayoutGen, prompt);
  if (!layout_rec) return finish();

  layout::LayoutScript script;
  std::vector<Point2> points;
  try {
    script = layout::parse_layout(layout_rec->cleaned);
  } catch (const layout::LayoutSyntaxError& e) {
    run.fail(Stage::Layout, Outcome::LayoutParseError, {where(e)});
    return finish();
  }
  try {
    points = layout::evaluate_layout(script);
  } catch (const layout::LayoutRuntimeError& e) {
    run.fail(Stage::Layout, Outcome::LayoutRuntimeError, {where(e)});
    return finish();
  }
  run.outcomes.push_back({Stage::Layout, Outcome::Ok, {}});

  // ---- geometry
  geometry::ConductorLayout layout{points, options.conductor_radius, options.boundary_margin};
  const std::string descriptor = layout::describe_pattern(script);
  try {
    geometry::validate(layout);
    geometry::validate(options.material);
    geometry::validate(options.excitation);
  } catch (const Error& e) {
    run.fail(Stage::Geometry, Outcome::InvalidGeometry, {where(e)});
    return finish();
  }
  {
    auto lj = io::layout_to_json(layout);
    lj["descriptor"] = descriptor;
    lj["script"] = layout_rec->cleaned;
    run.write("layout.json", lj.dump(2) + "\n");
  }
  if (const auto pairs = geometry::check_overlap(layout); !pairs.empty()) {
    std::vector<std::string> diags;
    for (const auto& [i, j] : pairs)
      diags.push_back("conductors " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " overlap");
    run.fail(Stage::Geometry, Outcome::GeometryViolation, diags);
    return finish();
  }
  const auto intent = check_intent(prompt, points);
  if (intent.outcome == Outcome::IntentMismatch) {
    run.fail(Stage::Geometry, intent.outcome, intent.diagnostics);
    return finish();
  }

  // ---- mesh and solve
  solver::FEProblem problem;
  solver::SolveResult result;
  try {
    const auto bnd = geometry::boundary(layout);
    const auto sizes = mesh::scaled(mesh::MeshSizeSpec::defaults(layout, bnd), options.mesh_scale);
    problem = solver::FEProblem::make(mesh::generate_mesh(layout, bnd, sizes), options.material, options.excitation);
    result = solver::solve(problem);
  } catch (const io::FileError&) {
    throw;
  } catch (const Error& e) {
    run.fail(Stage::Geometry, Outcome::GeometryViolation, {"simulation failed: " + where(e)});
    return finish();
  }
  run.outcomes.push_back({Stage::Geometry, intent.outcome, intent.diagnostics});

  const auto fields = solver::derive_fields(result, problem);
  const auto creport = solver::conductor_report(result, problem);
  run.write("mesh.json", io::mesh_to_json(problem.mesh).dump() + "\n");
  run.write("solution.json", io::solution_to_json(result, problem, creport).dump(2) + "\n");
  const auto arrays = io::standard_field_arrays(fields);
  run.write("Results/fields.vtk", io::mesh_to_vtk(problem.mesh, arrays, "fields"));
  run.write("Results/fields.json", io::fields_to_json(problem.mesh, arrays).dump() + "\n");

  genai::FactSheet facts = build_fact_sheet(result, problem, layout, descriptor);
  run.report.facts = facts;
  if (mode == Mode::LayoutOnly) return finish();

  // ---- post-processing
  const auto dsl_id = options.dsl_examples ? genai::TemplateId::DslWithExamples : genai::TemplateId::DslWithoutExamples;
  const auto dsl_rec = run.call(dsl_id, prompt);
  if (!dsl_rec) return finish();

  post::PostProgram program;
  try {
    program = post::parse_post(dsl_rec->cleaned);
  } catch (const post::DslSyntaxError& e) {
    std::vector<std::string> diags;
    for (const auto& d : e.diagnostics()) diags.push_back(post::format(d));
    run.fail(Stage::Dsl, Outcome::DslParseError, diags);
    return finish();
  }
  const auto vdiags = post::validate_post(program, post::region_names(problem.mesh));
  std::vector<std::string> semantic, kind;
  for (const auto& d : vdiags) {
    if (d.severity != post::Severity::Error) continue;
    (d.layer == "physics_syntax" ? kind : semantic).push_back(post::format(d));
  }
  if (!semantic.empty()) {
    run.fail(Stage::Dsl, Outcome::DslResolutionError, semantic);
    return finish();
  }
  if (!kind.empty()) {
    run.fail(Stage::Dsl, Outcome::DslKindError, kind);
    return finish();
  }
  std::vector<std::string> lint;
  for (const auto& d : post::physics_lint(program)) lint.push_back(post::format(d));

  // lint findings still get their plots; the verdict carries the failure
  try {
    const auto values = post::evaluate_post(program, result, problem);
    const auto paths = post::write_artifacts(program, values, problem, session.dir());
    for (const auto& p : paths) run.written.push_back(p.generic_string());
    for (const auto& op : program.operations)
      for (const auto& pr : op.prints) {
        genai::ArtifactFact a;
        a.path = post::confined_print_path(pr).generic_string();
        a.quantity = pr.quantity;
        if (const auto* q = program.find_quantity(pr.quantity)) a.regions = q->regions;
        facts.artifacts.push_back(a);
      }
    run.report.facts = facts;
  } catch (const io::FileError&) {
    throw;
  } catch (const Error& e) {
    run.fail(Stage::Dsl, Outcome::DslResolutionError, {where(e)});
    return finish();
  }
  if (!lint.empty()) {
    run.fail(Stage::Dsl, Outcome::PhysicsLint, lint);
    return finish();
  }
  run.outcomes.push_back({Stage::Dsl, Outcome::Ok, {}});
  if (mode != Mode::WithPostAndSummary) return finish();

  // ---- summary; needs_human upstream does not block it
  std::optional<genai::CompletionRecord> sum;
  try {
    sum = genai::summarize(options.provider, facts, layout_rec->cleaned + "\n\n" + dsl_rec->cleaned, options.transport);
    session.append_completion(*sum);
    run.report.completions.push_back(*sum);
  } catch (const io::FileError&) {
    throw;
  } catch (const Error& e) {
    run.report.provider_error = where(e);
    return finish();
  }
  run.report.summary = sum->cleaned;
  if (auto bad = summary_syntax_problems(sum->cleaned); !bad.empty()) {
    run.fail(Stage::Summary, Outcome::SummaryMalformed, bad);
  } else if (const auto n = genai::stated_conductor_count(sum->cleaned); !n) {
    run.fail(Stage::Summary, Outcome::SummaryUnverifiable, {"summary states no conductor count; review it"});
  } else if (*n != facts.conductor_count) {
    run.fail(Stage::Summary, Outcome::SummaryMismatch,
             {"summary mentions " + std::to_string(*n) + " conductors, the model has " +
              std::to_string(facts.conductor_count)});
  } else {
    run.fail(Stage::Summary, Outcome::SummaryUnverifiable,
             {"conductor count matches the model; the rest of the summary needs review"});
  }
  return finish();
}

}  // namespace emsim::pipeline
