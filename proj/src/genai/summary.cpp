#include <cmath>
#include <cstdio>
#include <sstream>

#include "emsim/genai.hpp"

namespace emsim::genai {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string plural(int n, const char* word) { return std::to_string(n) + " " + word + (n == 1 ? "" : "s"); }

std::string join_numbers(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += i + 1 == v.size() ? " and " : ", ";
    s += std::to_string(v[i]);
  }
  return s;
}

std::string where(const ArtifactFact& a, int n) {
  std::vector<int> ids;
  for (const auto& r : a.regions) {
    if (r == "Omega") return "over the whole domain";
    if (r == "Omega_c") return "in all conductors";
    if (r == "Omega_i") return "in the insulating region";
    if (r.rfind("Omega_c_", 0) == 0) ids.push_back(std::stoi(r.substr(8)));
  }
  if (ids.empty()) return "on the selected region";
  if (static_cast<int>(ids.size()) == n) return "in all conductors";
  return (ids.size() == 1 ? "only for conductor " : "only for conductors ") + join_numbers(ids);
}

}  // namespace

std::string fact_sheet_text(const FactSheet& f) {
  std::ostringstream os;
  os << "conductors: " << f.conductor_count << "\n";
  os << "layout: " << f.layout_descriptor << "\n";
  os << "conductor radius: " << fmt("%.6g", f.conductor_radius) << " m\n";
  os << "domain radius: " << fmt("%.6g", f.boundary_radius) << " m\n";
  os << "frequency: " << fmt("%.6g", f.frequency) << " Hz\n";
  os << "skin depth: " << (std::isfinite(f.skin_depth) ? fmt("%.6g", f.skin_depth) + " m" : "infinite (DC)") << "\n";
  for (std::size_t i = 0; i < f.conductors.size(); ++i) {
    const auto& c = f.conductors[i];
    os << "conductor " << i + 1 << ": center (" << fmt("%.6g", c.center.x) << ", " << fmt("%.6g", c.center.y)
       << ") m, current " << fmt("%.6g", std::abs(c.current)) << " A, loss " << fmt("%.6g", c.loss) << " W/m\n";
  }
  os << "total loss: " << fmt("%.6g", f.total_loss) << " W/m\n";
  for (const auto& a : f.artifacts) os << "plot: " << a.quantity << " " << where(a, f.conductor_count) << "\n";
  return os.str();
}

std::string template_summary(const FactSheet& f) {
  std::ostringstream os;
  const int n = f.conductor_count;
  os << "The model contains " << plural(n, "conductor") << " with a radius of "
     << fmt("%.3g", f.conductor_radius * 1e3) << " mm";
  if (!f.layout_descriptor.empty()) os << " in a " << f.layout_descriptor;
  os << ", inside a circular domain of radius " << fmt("%.3g", f.boundary_radius) << " m with a perfectly conducting boundary.";
  if (f.frequency > 0) {
    os << " Each conductor carries an imposed current at " << fmt("%.6g", f.frequency)
       << " Hz; the current density is non-zero only inside the conductors and points along z.";
    const std::string delta = fmt("%.3g", f.skin_depth * 1e3) + " mm";
    if (f.skin_depth > f.conductor_radius)
      os << " The skin depth of " << delta
         << " exceeds the conductor radius, so the skin effect is weak and the current distribution within each conductor is near-uniform.";
    else
      os << " The skin depth of " << delta
         << " does not exceed the conductor radius, so the skin effect concentrates the current near the conductor surfaces.";
    if (n > 1)
      os << " Since there is more than one conductor, both skin and proximity effects are present: the field of the neighbouring conductors shifts the current within each cross-section.";
  } else {
    os << " The excitation is a direct current, so there is no skin effect and the current density is uniform in each conductor.";
  }
  for (const auto& a : f.artifacts) os << " The quantity " << a.quantity << " is plotted " << where(a, n) << ".";
  os << " The total ohmic loss is " << fmt("%.4g", f.total_loss) << " W/m";
  if (n > 1 && n <= 12) {
    os << " (per conductor:";
    for (std::size_t i = 0; i < f.conductors.size(); ++i)
      os << (i ? "," : "") << " " << i + 1 << ": " << fmt("%.4g", f.conductors[i].loss);
    os << " W/m)";
  } else if (n > 12) {
    double lo = f.conductors.front().loss, hi = lo;
    for (const auto& c : f.conductors) {
      lo = std::min(lo, c.loss);
      hi = std::max(hi, c.loss);
    }
    os << ", between " << fmt("%.4g", lo) << " and " << fmt("%.4g", hi) << " W/m per conductor";
  }
  os << ".";
  return os.str();
}

CompletionRecord summarize(const ProviderConfig& config, const FactSheet& facts, const std::string& first_stage,
                           const Transport& transport) {
  const std::string stage = first_stage + "\n\nFact sheet:\n" + fact_sheet_text(facts);
  CompletionRequest req;
  req.id = TemplateId::Summary;
  req.user_input = "Provide a summary of the output.";
  req.prompt = render_prompt(builtin_template(TemplateId::Summary), stage);
  if (config.kind == ProviderKind::Http) return complete(config, req, transport);
  CompletionRecord rec;
  rec.id = TemplateId::Summary;
  rec.prompt = req.prompt;
  rec.provider = ProviderKind::Stub;
  rec.raw = template_summary(facts);
  rec.cleaned = clean_output(rec.raw);
  return rec;
}

}  // namespace emsim::genai
