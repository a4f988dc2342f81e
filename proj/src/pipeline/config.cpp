#include <cstdlib>
#include <set>

#include "emsim/pipeline.hpp"

namespace emsim::pipeline {

namespace {

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

}  // namespace

WorkflowOptions options_from_json(const json& c, WorkflowOptions o) {
  only_keys(c,
            {"provider", "dsl_examples", "mesh_scale", "frequency_Hz", "current_A", "conductivity_S_per_m",
             "conductor_radius_m", "boundary_margin_m"},
            "config");
  if (c.contains("provider")) {
    const auto& p = c.at("provider");
    only_keys(p, {"kind", "endpoint", "model", "api_key_env", "timeout_s", "max_retries", "retry_backoff_s"},
              "provider");
    if (p.contains("kind")) {
      const auto kind = p.at("kind").is_string() ? p.at("kind").get<std::string>() : "";
      if (kind == "stub")
        o.provider.kind = genai::ProviderKind::Stub;
      else if (kind == "http")
        o.provider.kind = genai::ProviderKind::Http;
      else
        throw ConfigError("provider.kind must be \"stub\" or \"http\"");
    }
    read(p, "endpoint", o.provider.endpoint);
    read(p, "model", o.provider.model);
    read(p, "api_key_env", o.provider.api_key_env);
    read(p, "timeout_s", o.provider.timeout_s);
    read(p, "max_retries", o.provider.max_retries);
    read(p, "retry_backoff_s", o.provider.retry_backoff_s);
    if (o.provider.max_retries < 0) throw ConfigError("provider.max_retries must be >= 0");
    if (!(o.provider.timeout_s > 0)) throw ConfigError("provider.timeout_s must be > 0");
  }
  read(c, "dsl_examples", o.dsl_examples);
  read(c, "mesh_scale", o.mesh_scale);
  read(c, "frequency_Hz", o.excitation.frequency_Hz);
  read(c, "current_A", o.excitation.current_amplitude_A);
  read(c, "conductivity_S_per_m", o.material.conductivity_S_per_m);
  read(c, "conductor_radius_m", o.conductor_radius);
  read(c, "boundary_margin_m", o.boundary_margin);
  if (!(o.mesh_scale > 0)) throw ConfigError("mesh_scale must be > 0");
  return o;
}

genai::ProviderKind default_provider_kind(const genai::ProviderConfig& config) {
  const char* key = std::getenv(config.api_key_env.c_str());
  return key && *key ? genai::ProviderKind::Http : genai::ProviderKind::Stub;
}

}  // namespace emsim::pipeline
