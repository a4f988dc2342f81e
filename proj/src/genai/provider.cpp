#include <chrono>
#include <cmath>
#include <ctime>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "emsim/genai.hpp"
#include "genai/assets.hpp"

namespace emsim::genai {

using json = nlohmann::json;

namespace {

std::string fixture_key(TemplateId id, std::string_view input) {
  return std::string(to_string(id)) + "\n" + normalize_input(input);
}

const std::map<std::string, std::string>& builtin_fixtures() {
  static const std::map<std::string, std::string> table = [] {
    std::map<std::string, std::string> m;
    const auto j = json::parse(assets::stub_fixtures);
    for (const auto& f : j.at("fixtures")) {
      const auto id = template_from_string(f.at("template").get<std::string>());
      if (!id) throw std::logic_error("stub fixture with unknown template");
      m[fixture_key(*id, f.at("input").get<std::string>())] = f.at("output").get<std::string>();
    }
    return m;
  }();
  return table;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool mentions(const std::string& text, const char* word) { return text.find(word) != std::string::npos; }

// Offline generator for prompts without a fixture: count plus circle, axis
// or grid, otherwise a row along x.
std::string fallback_layout(const std::string& input) {
  const int n = std::clamp(stated_conductor_count(input).value_or(3), 1, 400);
  std::ostringstream s;
  if (mentions(input, "circle") && n > 1) {
    const double r = std::max(0.03, 0.012 / (2 * std::sin(std::numbers::pi / n)));
    s << "let n = " << n << "\nlet r = " << num(r)
      << "\nfor k in 0..n {\n  emit point(r * cos(2 * pi * k / n), r * sin(2 * pi * k / n))\n}\n";
  } else if (mentions(input, "grid") && n > 1) {
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    s << "for i in 0.." << cols << " {\n  for j in 0.." << cols << " {\n    if i * " << cols << " + j < " << n
      << " {\n      emit point(i * 0.02, j * 0.02)\n    }\n  }\n}\n";
  } else if (mentions(input, "y-axis")) {
    s << "for k in 0.." << n << " {\n  emit point(0.0, (k - " << num((n - 1) / 2.0) << ") * 0.02)\n}\n";
  } else {
    s << "for k in 0.." << n << " {\n  emit point((k - " << num((n - 1) / 2.0) << ") * 0.02, 0.0)\n}\n";
  }
  return s.str();
}

std::string fallback_dsl(const std::string& input) {
  std::string name = "OhmicLossDensity";
  std::string expr = "sigma[]/2 * Norm[ (- Dt[{a}] - {grad_phi}) ]^2";
  std::string region = "Omega_c";
  std::string label = "p_V(xyz) [W/m^3]";
  if (mentions(input, "energy")) {
    name = "MagneticEnergyDensity";
    expr = "0.25 * nu[] * Norm[{d a}]^2";
    region = "Omega";
    label = "w_m(xyz) [J/m^3]";
  } else if (mentions(input, "magnetic field") || mentions(input, "magnetic vector field")) {
    name = "h_vector_field";
    expr = "nu[] * {d a}";
    region = "Omega";
    label = "H(xyz) [A/m]";
  }
  return "PostProcessing {\n  { Name MagDyn_b; NameOfFormulation MagDyn_a;\n    PostQuantity {\n      { Name " + name +
         ";\n        Value { Local { [ " + expr + " ];\n        In Region[{" + region +
         "}]; Jacobian Vol; } } }\n    }\n  }\n}\n\nPostOperation {\n  { Name MagDyn_b; NameOfPostProcessing MagDyn_b;\n"
         "    Operation {\n      Print[ " + name + ", OnElementsOf Omega, File \"Results/" + name +
         ".pos\", Name \"" + label + "\", Format Gmsh ];\n    }\n  }\n}\n";
}

std::string stub_output(const ProviderConfig& config, const CompletionRequest& r) {
  const std::string key = fixture_key(r.id, r.user_input);
  for (const auto& f : config.extra_fixtures)
    if (fixture_key(f.id, f.input) == key) return f.output;
  const auto& table = builtin_fixtures();
  if (auto it = table.find(key); it != table.end()) return it->second;
  const bool dsl = r.id == TemplateId::DslWithExamples || r.id == TemplateId::DslWithoutExamples;
  if (dsl) {
    const auto other = r.id == TemplateId::DslWithExamples ? TemplateId::DslWithoutExamples : TemplateId::DslWithExamples;
    if (auto it = table.find(fixture_key(other, r.user_input)); it != table.end()) return it->second;
    return fallback_dsl(normalize_input(r.user_input));
  }
  if (r.id == TemplateId::LayoutGen) return fallback_layout(normalize_input(r.user_input));
  return "Summary unavailable.";
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string excerpt(const std::string& s) { return s.size() > 200 ? s.substr(0, 200) + "..." : s; }

std::string http_complete(const ProviderConfig& config, const CompletionRequest& r, const Transport& transport,
                          CompletionRecord& rec) {
  const char* key = std::getenv(config.api_key_env.c_str());
  if (!key || !*key) throw AuthMissing("environment variable " + config.api_key_env + " is not set");
  const Transport& send = transport ? transport : http_transport();

  HttpRequest req;
  req.url = config.endpoint;
  req.timeout_s = config.timeout_s;
  req.headers = {{"Authorization", std::string("Bearer ") + key}, {"Content-Type", "application/json"}};
  req.body = json{{"model", config.model},
                  {"messages", json::array({{{"role", "system"}, {"content", r.prompt}},
                                            {{"role", "user"}, {"content", r.user_input}}})}}
                 .dump();

  bool last_timeout = false;
  double backoff = config.retry_backoff_s;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0 && backoff > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2;
    }
    rec.attempts = attempt + 1;
    HttpResponse res;
    try {
      res = send(req);
    } catch (const TransportError& e) {
      last_timeout = e.timeout();
      rec.retry_log.push_back(e.what());
      continue;
    }
    if (res.status == 429 || res.status >= 500) {
      last_timeout = false;
      rec.retry_log.push_back("HTTP " + std::to_string(res.status));
      continue;
    }
    if (res.status != 200)
      throw ProviderUnavailable("HTTP " + std::to_string(res.status) + ": " + excerpt(res.body));
    try {
      const auto j = json::parse(res.body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw ProviderUnavailable("malformed completion response: " + excerpt(res.body));
    }
  }
  const std::string why = rec.retry_log.empty() ? "" : rec.retry_log.back();
  if (last_timeout) throw Timeout("no response after " + std::to_string(rec.attempts) + " attempts: " + why);
  throw ProviderUnavailable("no response after " + std::to_string(rec.attempts) + " attempts: " + why);
}

}  // namespace

std::string normalize_input(std::string_view s) {
  std::string out;
  bool space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c == 0xC3 && i + 1 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x97) {  // U+00D7
      c = 'x';
      ++i;
    }
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(c));
  }
  while (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

std::optional<int> stated_conductor_count(std::string_view prompt) {
  static const std::map<std::string, int> words{
      {"one", 1},   {"two", 2},    {"three", 3},    {"four", 4},    {"five", 5},     {"six", 6},
      {"seven", 7}, {"eight", 8},  {"nine", 9},     {"ten", 10},    {"eleven", 11},  {"twelve", 12},
      {"fifteen", 15}, {"twenty", 20}, {"single", 1}};
  std::vector<std::string> w;
  std::string cur;
  for (char c : normalize_input(prompt) + " ") {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-') {
      cur += c;
    } else if (!cur.empty()) {
      w.push_back(std::move(cur));
      cur.clear();
    }
  }
  auto conductor_at = [&](std::size_t i) { return i < w.size() && w[i].rfind("conductor", 0) == 0; };
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!conductor_at(i + 1) && !conductor_at(i + 2)) continue;
    if (std::isdigit(static_cast<unsigned char>(w[i][0])) && w[i].size() <= 6 &&
        w[i].find_first_not_of("0123456789") == std::string::npos)
      return std::stoi(w[i]);
    if (auto f = words.find(w[i]); f != words.end()) return f->second;
  }
  return std::nullopt;
}

CompletionRecord complete(const ProviderConfig& config, const CompletionRequest& request, const Transport& transport) {
  CompletionRecord rec;
  rec.id = request.id;
  rec.prompt = request.prompt;
  rec.provider = config.kind;
  rec.timestamp = now_utc();
  const auto t0 = std::chrono::steady_clock::now();
  rec.raw = config.kind == ProviderKind::Stub ? stub_output(config, request)
                                              : http_complete(config, request, transport, rec);
  rec.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  rec.cleaned = clean_output(rec.raw);
  return rec;
}

std::string clean_output(std::string_view raw) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= raw.size()) {
    const auto nl = raw.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(raw.substr(start));
      break;
    }
    lines.push_back(raw.substr(start, nl - start));
    start = nl + 1;
  }
  // a final newline terminates the last line rather than opening a blank one
  if (lines.size() > 1 && lines.back().empty()) lines.pop_back();

  auto is_blank = [](std::string_view l) {
    for (char c : l)
      if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
  };
  auto is_fence = [](std::string_view l) {
    const auto p = l.find_first_not_of(" \t");
    return p != std::string_view::npos && l.substr(p, 3) == "```";
  };

  bool fenced = false;
  for (auto l : lines) fenced = fenced || is_fence(l);
  const bool edges = !lines.empty() && (is_blank(lines.front()) || is_blank(lines.back()));
  if (!fenced && !edges) return std::string(raw);

  std::vector<std::string_view> kept;
  for (auto l : lines)
    if (!is_fence(l)) kept.push_back(l);
  std::size_t b = 0, e = kept.size();
  while (b < e && is_blank(kept[b])) ++b;
  while (e > b && is_blank(kept[e - 1])) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    if (i > b) out += '\n';
    out += kept[i];
  }
  return out;
}

}  // namespace emsim::genai
