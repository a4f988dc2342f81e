#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "emsim/io.hpp"
#include "emsim/mesher.hpp"
#include "emsim/pipeline.hpp"
#include "emsim/postdsl.hpp"
#include "emsim/server.hpp"

namespace fs = std::filesystem;

namespace emsim::cli {

using json = nlohmann::json;

namespace {

struct Globals {
  std::string config;
  std::string out = "emsim_out";
  bool json = false;
};

struct RunFlags {
  std::string prompt;
  std::string provider = "auto";
  std::string mode = "with_post_and_summary";
  bool no_examples = false;
  double mesh_scale = 0.0;  // 0: keep the config value
};

struct SolveFlags {
  std::string layout;
  double freq = -1.0;  // < 0: keep the config value
  double current = std::numeric_limits<double>::quiet_NaN();
  double mesh_scale = 0.0;
};

struct CheckFlags {
  std::string file;
  int conductors = -1;
  std::string layout;
};

struct ServeFlags {
  std::string host = "127.0.0.1";
  int port = 8080;
};

// Options after the config file and --provider; ConfigError/FileError escape.
pipeline::WorkflowOptions load_options(const Globals& g, const std::string& provider) {
  pipeline::WorkflowOptions o;
  bool kind_set = false;
  if (!g.config.empty()) {
    json c;
    try {
      c = json::parse(io::read_file(g.config));
    } catch (const json::exception& e) {
      throw pipeline::ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    o = pipeline::options_from_json(c, o);
    kind_set = c.contains("provider") && c["provider"].contains("kind");
  }
  if (provider == "stub")
    o.provider.kind = genai::ProviderKind::Stub;
  else if (provider == "http")
    o.provider.kind = genai::ProviderKind::Http;
  else if (!kind_set)
    o.provider.kind = pipeline::default_provider_kind(o.provider);
  return o;
}

void print_ladder(const pipeline::WorkflowReport& r, std::ostream& out) {
  for (const auto& l : r.verdict.layers) {
    out << "  " << std::left << std::setw(20) << pipeline::to_string(l.layer) << pipeline::to_string(l.status) << "\n";
    for (const auto& d : l.diagnostics) out << "      " << d << "\n";
  }
}

int exit_for(const pipeline::WorkflowReport& r) {
  if (r.provider_error) return kProvider;
  return r.verdict.passed() ? kOk : kValidation;
}

void print_report(const pipeline::Session& s, const pipeline::WorkflowReport& r, const Globals& g, std::ostream& out,
                  std::ostream& err) {
  const int code = exit_for(r);
  if (g.json) {
    out << json{{"schema_version", 1},
                {"session", s.id()},
                {"report_path", (s.dir() / "report.json").string()},
                {"exit_code", code},
                {"report", pipeline::report_to_json(r)}}
               .dump(2)
        << "\n";
  } else {
    out << "session " << s.id() << " (" << s.dir().string() << ")\n";
    print_ladder(r, out);
    if (r.facts)
      out << "total loss " << std::setprecision(6) << r.facts->total_loss << " W/m over " << r.facts->conductor_count
          << " conductor(s)\n";
    for (const auto& a : r.artifacts) out << "  wrote " << a.path << "\n";
    if (r.summary) out << "\n" << *r.summary << "\n";
  }
  if (r.provider_error) err << "provider error: " << *r.provider_error << "\n";
}

int cmd_run(const Globals& g, const RunFlags& f, std::ostream& out, std::ostream& err) {
  const auto mode = pipeline::mode_from_string(f.mode);
  if (!mode) {
    err << "unknown mode '" << f.mode << "' (layout_only, with_post, with_post_and_summary)\n";
    return kUsage;
  }
  auto o = load_options(g, f.provider);
  if (f.no_examples) o.dsl_examples = false;
  if (f.mesh_scale > 0) o.mesh_scale = f.mesh_scale;
  const auto s = pipeline::Session::create(g.out);
  const auto r = pipeline::run_workflow(s, f.prompt, *mode, o);
  print_report(s, r, g, out, err);
  return exit_for(r);
}

int cmd_solve(const Globals& g, const SolveFlags& f, std::ostream& out, std::ostream& err) {
  auto o = load_options(g, "stub");
  if (f.freq >= 0) o.excitation.frequency_Hz = f.freq;
  if (!std::isnan(f.current)) o.excitation.current_amplitude_A = f.current;
  if (f.mesh_scale > 0) o.mesh_scale = f.mesh_scale;

  json lj;
  try {
    lj = json::parse(io::read_file(f.layout));
  } catch (const json::exception& e) {
    err << "layout file is not valid JSON: " << e.what() << "\n";
    return kUsage;
  }
  geometry::ConductorLayout layout;
  try {
    layout = io::layout_from_json(lj);
    geometry::validate(layout);
    geometry::validate(o.excitation);
    geometry::validate(o.material);
  } catch (const Error& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return kValidation;
  }
  if (const auto pairs = geometry::check_overlap(layout); !pairs.empty()) {
    err << "overlapping conductors:";
    for (const auto& [i, j] : pairs) err << " (" << i << "," << j << ")";
    err << "\n";
    if (g.json) {
      json p = json::array();
      for (const auto& [i, j] : pairs) p.push_back({i, j});
      out << json{{"schema_version", 1}, {"error", "overlap"}, {"pairs", p}}.dump(2) << "\n";
    }
    return kValidation;
  }

  solver::FEProblem problem;
  solver::SolveResult result;
  try {
    const auto bnd = geometry::boundary(layout);
    const auto sizes = mesh::scaled(mesh::MeshSizeSpec::defaults(layout, bnd), o.mesh_scale);
    problem = solver::FEProblem::make(mesh::generate_mesh(layout, bnd, sizes), o.material, o.excitation);
    result = solver::solve(problem);
  } catch (const io::FileError&) {
    throw;
  } catch (const Error& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return kValidation;
  }
  const auto report = solver::conductor_report(result, problem);
  const auto fields = solver::derive_fields(result, problem);
  const auto arrays = io::standard_field_arrays(fields);
  const fs::path dir = g.out;
  io::write_file_atomic(dir / "mesh.json", io::mesh_to_json(problem.mesh).dump() + "\n");
  io::write_file_atomic(dir / "solution.json", io::solution_to_json(result, problem, report).dump(2) + "\n");
  io::write_file_atomic(dir / "Results/fields.vtk", io::mesh_to_vtk(problem.mesh, arrays, "fields"));
  io::write_file_atomic(dir / "Results/fields.json", io::fields_to_json(problem.mesh, arrays).dump() + "\n");

  double total = 0;
  for (const auto& r : report) total += r.loss;
  if (g.json) {
    json rows = json::array();
    for (std::size_t i = 0; i < report.size(); ++i)
      rows.push_back({{"index", i},
                      {"center", {layout.centers[i].x, layout.centers[i].y}},
                      {"current", {report[i].current.real(), report[i].current.imag()}},
                      {"voltage", {report[i].voltage.real(), report[i].voltage.imag()}},
                      {"loss_W_per_m", report[i].loss}});
    out << json{{"schema_version", 1},
                {"frequency_Hz", o.excitation.frequency_Hz},
                {"triangles", problem.mesh.triangles.size()},
                {"dofs", result.dof_count},
                {"conductors", rows},
                {"total_loss_W_per_m", total},
                {"out", dir.string()}}
               .dump(2)
        << "\n";
    return kOk;
  }
  out << problem.mesh.triangles.size() << " triangles, " << result.dof_count << " unknowns, f = "
      << o.excitation.frequency_Hz << " Hz\n";
  out << std::left << std::setw(4) << "i" << std::setw(26) << "current [A]" << std::setw(28) << "u [V/m]"
      << "loss [W/m]\n";
  char buf[160];
  for (std::size_t i = 0; i < report.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-4zu%+.6e%+.6ej  %+.6e%+.6ej  %.6e\n", i, report[i].current.real(),
                  report[i].current.imag(), report[i].voltage.real(), report[i].voltage.imag(), report[i].loss);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "total loss %.6e W/m\n", total);
  out << buf << "artifacts in " << dir.string() << "\n";
  return kOk;
}

int cmd_check(const Globals& g, const CheckFlags& f, std::ostream& out, std::ostream& err) {
  std::set<std::string> regions;
  if (!f.layout.empty()) {
    try {
      regions = post::region_names(static_cast<int>(io::layout_from_json(json::parse(io::read_file(f.layout))).size()));
    } catch (const json::exception& e) {
      err << "layout file is not valid JSON: " << e.what() << "\n";
      return kUsage;
    }
  } else if (f.conductors >= 1) {
    regions = post::region_names(f.conductors);
  } else {
    err << "check needs --conductors N or --layout FILE\n";
    return kUsage;
  }
  const auto source = io::read_file(f.file);

  std::vector<post::Diagnostic> diags;
  try {
    const auto program = post::parse_post(source);
    diags = post::validate_post(program, regions);
    for (auto& d : post::physics_lint(program)) diags.push_back(std::move(d));
  } catch (const post::DslSyntaxError& e) {
    diags = e.diagnostics();
  }
  // lint findings are warnings, but they still fail physics_semantics
  const bool failed = !diags.empty();
  if (g.json) {
    json arr = json::array();
    for (const auto& d : diags)
      arr.push_back({{"layer", d.layer},
                     {"severity", d.severity == post::Severity::Error ? "error" : "warning"},
                     {"line", d.loc.line},
                     {"column", d.loc.column},
                     {"message", d.message}});
    out << json{{"schema_version", 1}, {"file", f.file}, {"passed", !failed}, {"diagnostics", arr}}.dump(2) << "\n";
  } else {
    for (const auto& d : diags) out << f.file << ": " << post::format(d) << "\n";
    if (!failed) out << f.file << ": ok\n";
  }
  return failed ? kValidation : kOk;
}

int cmd_repl(const Globals& g, const RunFlags& f, std::istream& in, std::ostream& out, std::ostream& err) {
  const auto mode = pipeline::mode_from_string(f.mode);
  if (!mode) {
    err << "unknown mode '" << f.mode << "'\n";
    return kUsage;
  }
  auto o = load_options(g, f.provider);
  if (f.no_examples) o.dsl_examples = false;
  if (f.mesh_scale > 0) o.mesh_scale = f.mesh_scale;
  const auto s = pipeline::Session::create(g.out);
  out << "session " << s.id() << "; empty line or :q to quit\n";
  std::string line;
  while (out << "> " << std::flush, std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line == ":q" || line == "quit" || line == "exit") break;
    const auto r = pipeline::run_workflow(s, line, *mode, o);
    print_report(s, r, g, out, err);
  }
  out << "\n";
  return kOk;
}

int cmd_serve(const Globals& g, const RunFlags& f, const ServeFlags& sf, std::ostream& out, std::ostream& err) {
  server::ServerConfig c;
  c.root = g.out;
  c.options = load_options(g, f.provider);
  server::Server srv(c);
  const int port = srv.bind(sf.host, sf.port);
  if (port < 0) {
    err << "cannot bind " << sf.host << ":" << sf.port << "\n";
    return kUsage;
  }
  out << "serving sessions from " << c.root.string() << " on http://" << sf.host << ":" << port << "\n" << std::flush;
  return srv.listen_after_bind() ? kOk : kUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompt-driven 2D magnetoquasistatic simulation", "emsim"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "session root (run, repl, serve) or output directory (solve)");
  app.add_flag("--json", g.json, "machine-readable output");

  RunFlags rf;
  auto* run_cmd = app.add_subcommand("run", "one workflow run from a prompt");
  run_cmd->add_option("--prompt,prompt", rf.prompt, "user prompt")->required();
  run_cmd->add_option("--provider", rf.provider, "stub, http or auto (http when the key variable is set)")
      ->check(CLI::IsMember({"stub", "http", "auto"}));
  run_cmd->add_option("--mode", rf.mode, "layout_only, with_post or with_post_and_summary");
  run_cmd->add_flag("--no-dsl-examples", rf.no_examples, "use the DSL template without worked examples");
  run_cmd->add_option("--mesh-scale", rf.mesh_scale, "multiply the default mesh sizes")->check(CLI::PositiveNumber);

  SolveFlags sf;
  auto* solve_cmd = app.add_subcommand("solve", "mesh and solve a layout JSON file, no LLM involved");
  solve_cmd->add_option("layout", sf.layout, "layout JSON {centers: [[x, y], ...], radius_m?, boundary_margin_m?}")
      ->required()
      ->check(CLI::ExistingFile);
  solve_cmd->add_option("--freq", sf.freq, "frequency in Hz (0 for DC)")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--current", sf.current, "peak current per conductor in A");
  solve_cmd->add_option("--mesh-scale", sf.mesh_scale, "multiply the default mesh sizes")->check(CLI::PositiveNumber);

  CheckFlags cf;
  auto* check_cmd = app.add_subcommand("check", "layered checks of a post-processing file");
  check_cmd->add_option("file", cf.file, "post-processing source")->required()->check(CLI::ExistingFile);
  auto* n_opt = check_cmd->add_option("--conductors", cf.conductors, "conductor count of the model")
                    ->check(CLI::PositiveNumber);
  check_cmd->add_option("--layout", cf.layout, "layout JSON giving the conductor count")
      ->check(CLI::ExistingFile)
      ->excludes(n_opt);

  RunFlags repl_flags;
  auto* repl_cmd = app.add_subcommand("repl", "read prompts from stdin, one run each");
  repl_cmd->add_option("--provider", repl_flags.provider)->check(CLI::IsMember({"stub", "http", "auto"}));
  repl_cmd->add_option("--mode", repl_flags.mode);
  repl_cmd->add_flag("--no-dsl-examples", repl_flags.no_examples);
  repl_cmd->add_option("--mesh-scale", repl_flags.mesh_scale)->check(CLI::PositiveNumber);

  ServeFlags serve_flags;
  RunFlags serve_run;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP/JSON API over the session store");
  serve_cmd->add_option("--host", serve_flags.host);
  serve_cmd->add_option("--port", serve_flags.port)->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--provider", serve_run.provider)->check(CLI::IsMember({"stub", "http", "auto"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(g, rf, out, err);
    if (*solve_cmd) return cmd_solve(g, sf, out, err);
    if (*check_cmd) return cmd_check(g, cf, out, err);
    if (*repl_cmd) return cmd_repl(g, repl_flags, in, out, err);
    if (*serve_cmd) return cmd_serve(g, serve_run, serve_flags, out, err);
  } catch (const pipeline::ConfigError& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  err << app.help();
  return kUsage;
}

}  // namespace emsim::cli
