#pragma once

// prompt -> layout -> geometry -> mesh -> solve -> post-processing -> summary,
// with every failure classified on the syntax/semantics ladder.

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emsim/genai.hpp"
#include "emsim/geometry.hpp"
#include "emsim/solver.hpp"

namespace emsim::pipeline {

using json = nlohmann::json;

enum class Layer {
  LayoutSyntax,
  LayoutSemantics,
  GeometrySyntax,
  GeometrySemantics,
  DslSyntax,
  DslSemantics,
  PhysicsSyntax,
  PhysicsSemantics,
  SummarySyntax,
  SummarySemantics,
};
inline constexpr std::size_t kLayerCount = 10;
std::string_view to_string(Layer l);

enum class Status { Ok, Failed, Skipped, NeedsHuman };
std::string_view to_string(Status s);

struct LayerVerdict {
  Layer layer = Layer::LayoutSyntax;
  Status status = Status::Skipped;
  std::vector<std::string> diagnostics;
};

struct ValidationVerdict {
  std::array<LayerVerdict, kLayerCount> layers;

  ValidationVerdict();
  const LayerVerdict& at(Layer l) const { return layers[static_cast<std::size_t>(l)]; }
  LayerVerdict& at(Layer l) { return layers[static_cast<std::size_t>(l)]; }
  std::optional<Layer> first_failure() const;
  /// No layer failed (ok, skipped and needs_human are all acceptable).
  bool passed() const { return !first_failure(); }
};

enum class Mode { LayoutOnly, WithPost, WithPostAndSummary };
std::string_view to_string(Mode m);
std::optional<Mode> mode_from_string(std::string_view s);

// ------------------------------------------------------------- classification

enum class Stage { Layout, Geometry, Dsl, Summary };

enum class Outcome {
  Ok,
  LayoutParseError,     // layout_syntax
  LayoutRuntimeError,   // layout_semantics
  InvalidGeometry,      // geometry_syntax: empty, non-finite, bad radius
  GeometryViolation,    // geometry_semantics: overlap, bounds, unmeshable
  IntentMismatch,       // geometry_semantics: checkable intent violated
  IntentUnverifiable,   // geometry_semantics: needs_human
  DslParseError,        // dsl_syntax
  DslResolutionError,   // dsl_semantics
  DslKindError,         // physics_syntax
  PhysicsLint,          // physics_semantics
  SummaryMalformed,     // summary_syntax
  SummaryMismatch,      // summary_semantics
  SummaryUnverifiable,  // summary_semantics: needs_human
};

struct StageOutcome {
  Stage stage = Stage::Layout;
  Outcome outcome = Outcome::Ok;
  std::vector<std::string> diagnostics;
};

/// Stages absent from `outcomes` leave their layers skipped; a failed layer
/// turns every later layer into skipped.
ValidationVerdict classify(const std::vector<StageOutcome>& outcomes);

// ------------------------------------------------------------------- intent

struct IntentCheck {
  Outcome outcome = Outcome::Ok;  // Ok, IntentMismatch or IntentUnverifiable
  std::vector<std::string> diagnostics;
};

/// Machine-checks the geometric statements of a prompt (conductor count,
/// circle and its radius, x/y axis, "a x b grid") against the emitted points.
IntentCheck check_intent(std::string_view prompt, const std::vector<Point2>& points);

// ------------------------------------------------------------------ reports

struct ArtifactEntry {
  std::string path;  // session relative, '/' separated
  std::uintmax_t bytes = 0;
  std::string fnv1a;
};

struct WorkflowReport {
  Mode mode = Mode::LayoutOnly;
  std::string prompt;
  ValidationVerdict verdict;
  std::optional<genai::FactSheet> facts;
  std::optional<std::string> summary;
  std::vector<genai::CompletionRecord> completions;
  std::vector<ArtifactEntry> artifacts;
  std::optional<std::string> provider_error;  // "Kind: message"
};

/// Deterministic: no timings, timestamps or session id.
json report_to_json(const WorkflowReport& r);
json facts_to_json(const genai::FactSheet& f);

genai::FactSheet build_fact_sheet(const solver::SolveResult& result, const solver::FEProblem& problem,
                                  const geometry::ConductorLayout& layout, const std::string& descriptor,
                                  const std::vector<genai::ArtifactFact>& artifacts = {});

// ------------------------------------------------------------------ sessions

struct WorkflowOptions {
  genai::ProviderConfig provider;
  genai::Transport transport;  // empty: the built-in HTTP transport
  bool dsl_examples = true;
  geometry::MaterialSpec material;
  geometry::ExcitationSpec excitation;
  double conductor_radius = geometry::kDefaultConductorRadius;
  double boundary_margin = geometry::kDefaultBoundaryMargin;
  double mesh_scale = 1.0;  // multiplies both default mesh sizes
};

class Session {
 public:
  /// New session directory root/<id>. Throws io::FileError.
  static Session create(const std::filesystem::path& root);
  /// Existing session; throws io::FileError if the id is malformed or absent.
  static Session open(const std::filesystem::path& root, const std::string& id);
  static bool valid_id(std::string_view id);

  const std::string& id() const { return id_; }
  const std::filesystem::path& dir() const { return dir_; }

  void append_message(const json& message) const;
  void append_completion(const genai::CompletionRecord& rec) const;
  std::mutex& run_mutex() const { return *mutex_; }

 private:
  Session(std::string id, std::filesystem::path dir);
  std::string id_;
  std::filesystem::path dir_;
  std::shared_ptr<std::mutex> mutex_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

/// Overlays a JSON config onto `base`. Keys: provider {kind, endpoint, model,
/// api_key_env, timeout_s, max_retries, retry_backoff_s}, dsl_examples,
/// mesh_scale, frequency_Hz, current_A, conductivity_S_per_m,
/// conductor_radius_m, boundary_margin_m. Unknown keys are rejected.
WorkflowOptions options_from_json(const json& config, WorkflowOptions base = {});

/// Http when the key variable of `config` is set, else Stub.
genai::ProviderKind default_provider_kind(const genai::ProviderConfig& config);

/// Never throws for workflow failures: they become verdict entries. The
/// report is also written to <session>/report.json.
WorkflowReport run_workflow(const Session& session, const std::string& prompt, Mode mode,
                            const WorkflowOptions& options = {});

}  // namespace emsim::pipeline
