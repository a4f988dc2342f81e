#pragma once

// LLM gateway: prompt templates, completion providers (stub or HTTP chat
// completion), output cleaning and the second-stage summary.

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emsim/geometry.hpp"

namespace emsim::genai {

enum class TemplateId { LayoutGen, DslWithExamples, DslWithoutExamples, Summary };

std::string_view to_string(TemplateId id);
std::optional<TemplateId> template_from_string(std::string_view s);

struct PromptTemplate {
  TemplateId id = TemplateId::LayoutGen;
  std::string body;         // `{name}` placeholders, literal braces doubled
  std::string placeholder;  // "user_input" or "stage_output"
};

class MissingPlaceholder : public Error {
 public:
  explicit MissingPlaceholder(const std::string& what) : Error("MissingPlaceholder", what) {}
};

class BlankPrompt : public Error {
 public:
  explicit BlankPrompt(const std::string& what) : Error("BlankPrompt", what) {}
};

/// Built-in template bodies compiled from prompts/*.txt.
const PromptTemplate& builtin_template(TemplateId id);

/// Throws MissingPlaceholder unless the template's placeholder occurs exactly
/// once and every other brace is doubled.
void check_template(const PromptTemplate& t);

/// Substitutes `{name}` from `context`, the template placeholder from
/// `user_input`, and collapses `{{`/`}}`. Blank input throws BlankPrompt.
std::string render_prompt(const PromptTemplate& t, std::string_view user_input,
                          const std::map<std::string, std::string>& context = {});

// ---------------------------------------------------------------- providers

enum class ProviderKind { Stub, Http };

struct StubFixture {
  TemplateId id = TemplateId::LayoutGen;
  std::string input;
  std::string output;
};

struct ProviderConfig {
  ProviderKind kind = ProviderKind::Stub;
  std::string endpoint = "https://generativelanguage.googleapis.com/v1beta/openai/chat/completions";
  std::string model = "gemini-2.0-flash";
  std::string api_key_env = "EMSIM_LLM_API_KEY";
  double timeout_s = 60.0;
  int max_retries = 2;
  double retry_backoff_s = 0.5;  // doubled after every failed attempt
  /// Consulted before the built-in fixtures (tests, local experiments).
  std::vector<StubFixture> extra_fixtures;
};

class ProviderUnavailable : public Error {
 public:
  explicit ProviderUnavailable(const std::string& what) : Error("ProviderUnavailable", what) {}
};

class Timeout : public Error {
 public:
  explicit Timeout(const std::string& what) : Error("Timeout", what) {}
};

class AuthMissing : public Error {
 public:
  explicit AuthMissing(const std::string& what) : Error("AuthMissing", what) {}
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  double timeout_s = 60.0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Raised by a transport when no HTTP response was obtained.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool timeout) : Error("TransportError", what), timeout_(timeout) {}
  bool timeout() const { return timeout_; }

 private:
  bool timeout_;
};

using Transport = std::function<HttpResponse(const HttpRequest&)>;

/// cpp-httplib based transport (https only when built with OpenSSL).
Transport http_transport();

struct CompletionRequest {
  TemplateId id = TemplateId::LayoutGen;
  std::string user_input;  // what the fixture lookup and the user message use
  std::string prompt;      // rendered system prompt
};

struct CompletionRecord {
  TemplateId id = TemplateId::LayoutGen;
  std::string prompt;
  std::string raw;
  std::string cleaned;
  double latency_ms = 0.0;
  ProviderKind provider = ProviderKind::Stub;
  std::string timestamp;  // UTC, ISO 8601
  int attempts = 1;
  std::vector<std::string> retry_log;  // one entry per failed attempt
};

/// Lower case, "×" read as "x", whitespace collapsed, trailing period dropped.
std::string normalize_input(std::string_view s);

/// Conductor count stated in a prompt ("12 conductors", "only one
/// conductor", "nine conductors"), if any.
std::optional<int> stated_conductor_count(std::string_view prompt);

/// Stub: canned output by (template, normalized input), else a small rule
/// based generator; never touches the transport. Http: AuthMissing when the
/// key variable is unset, before any network activity; transport failures and
/// 429/5xx are retried up to max_retries.
CompletionRecord complete(const ProviderConfig& config, const CompletionRequest& request,
                          const Transport& transport = {});

/// Drops markdown fence lines and leading/trailing blank lines. Text without
/// either comes back unchanged.
std::string clean_output(std::string_view raw);

// ------------------------------------------------------------------ summary

struct ConductorFact {
  Point2 center;
  std::complex<double> current;
  double loss = 0.0;  // W/m
};

struct ArtifactFact {
  std::string path;
  std::string quantity;
  std::vector<std::string> regions;
};

/// Numbers come from the solver and the post-processing, never from LLM text.
struct FactSheet {
  int conductor_count = 0;
  std::string layout_descriptor;
  double conductor_radius = 0.0;
  double boundary_radius = 0.0;
  double frequency = 0.0;
  double skin_depth = 0.0;  // infinity at DC
  std::vector<ConductorFact> conductors;
  double total_loss = 0.0;
  bool proximity = false;
  std::vector<ArtifactFact> artifacts;
};

/// Plain-text rendering used inside the summary prompt.
std::string fact_sheet_text(const FactSheet& facts);

/// Deterministic summary used by the stub provider.
std::string template_summary(const FactSheet& facts);

/// Stub: template_summary. Http: the summary prompt over the first-stage
/// output and the fact sheet.
CompletionRecord summarize(const ProviderConfig& config, const FactSheet& facts,
                           const std::string& first_stage, const Transport& transport = {});

}  // namespace emsim::genai
