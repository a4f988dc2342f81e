#include <cmath>
#include <numeric>

#include "emsim/pipeline.hpp"

namespace emsim::pipeline {

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json completion_to_json(const genai::CompletionRecord& c) {
  return {{"template", genai::to_string(c.id)},
          {"provider", c.provider == genai::ProviderKind::Stub ? "stub" : "http"},
          {"prompt", c.prompt},
          {"raw", c.raw},
          {"cleaned", c.cleaned},
          {"attempts", c.attempts},
          {"retry_log", c.retry_log}};
}

}  // namespace

json facts_to_json(const genai::FactSheet& f) {
  json conductors = json::array();
  for (const auto& c : f.conductors)
    conductors.push_back({{"center", {c.center.x, c.center.y}},
                          {"current", {c.current.real(), c.current.imag()}},
                          {"loss_W_per_m", c.loss}});
  json artifacts = json::array();
  for (const auto& a : f.artifacts)
    artifacts.push_back({{"path", a.path}, {"quantity", a.quantity}, {"regions", a.regions}});
  return {{"conductor_count", f.conductor_count},
          {"layout_descriptor", f.layout_descriptor},
          {"conductor_radius_m", f.conductor_radius},
          {"boundary_radius_m", f.boundary_radius},
          {"frequency_Hz", f.frequency},
          {"skin_depth_m", finite_or_null(f.skin_depth)},
          {"total_loss_W_per_m", f.total_loss},
          {"proximity", f.proximity},
          {"conductors", conductors},
          {"artifacts", artifacts}};
}

json report_to_json(const WorkflowReport& r) {
  json layers = json::array();
  for (const auto& l : r.verdict.layers)
    layers.push_back({{"layer", to_string(l.layer)}, {"status", to_string(l.status)}, {"diagnostics", l.diagnostics}});
  const auto ff = r.verdict.first_failure();
  json verdict = {{"passed", r.verdict.passed()},
                  {"first_failure", ff ? json(to_string(*ff)) : json(nullptr)},
                  {"layers", layers}};

  json completions = json::array();
  for (const auto& c : r.completions) completions.push_back(completion_to_json(c));
  json artifacts = json::array();
  for (const auto& a : r.artifacts) artifacts.push_back({{"path", a.path}, {"bytes", a.bytes}, {"fnv1a", a.fnv1a}});

  return {{"schema_version", 1},
          {"mode", to_string(r.mode)},
          {"prompt", r.prompt},
          {"verdict", verdict},
          {"facts", r.facts ? facts_to_json(*r.facts) : json(nullptr)},
          {"summary", r.summary ? json(*r.summary) : json(nullptr)},
          {"completions", completions},
          {"artifacts", artifacts},
          {"provider_error", r.provider_error ? json(*r.provider_error) : json(nullptr)}};
}

genai::FactSheet build_fact_sheet(const solver::SolveResult& result, const solver::FEProblem& problem,
                                  const geometry::ConductorLayout& layout, const std::string& descriptor,
                                  const std::vector<genai::ArtifactFact>& artifacts) {
  genai::FactSheet f;
  const auto report = solver::conductor_report(result, problem);
  f.conductor_count = static_cast<int>(layout.size());
  f.layout_descriptor = descriptor;
  f.conductor_radius = layout.radius_m;
  f.boundary_radius = geometry::boundary(layout).radius_m;
  f.frequency = problem.excitation.frequency_Hz;
  f.skin_depth = problem.material.conductivity_S_per_m > 0 ? geometry::skin_depth(problem.material, problem.excitation)
                                                            : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < report.size(); ++i) {
    f.conductors.push_back({layout.centers[i], report[i].current, report[i].loss});
    f.total_loss += report[i].loss;
  }
  f.proximity = f.conductor_count > 1 && f.frequency > 0;
  f.artifacts = artifacts;
  return f;
}

}  // namespace emsim::pipeline
