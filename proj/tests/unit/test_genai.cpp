#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <set>

#include <json.hpp>

#include "emsim/genai.hpp"
#include "emsim/layoutlang.hpp"

using namespace emsim;
using namespace emsim::genai;

namespace {

const char* kCirclePrompt =
    "Run an eddy current simulation model using 12 conductors following the pattern of a circle with radius r = 0.03 m.";

ProviderConfig http_config(const char* env) {
  ProviderConfig c;
  c.kind = ProviderKind::Http;
  c.api_key_env = env;
  c.max_retries = 2;
  c.retry_backoff_s = 0.0;
  return c;
}

std::string ok_body(const std::string& content) {
  nlohmann::json msg = {{"role", "assistant"}, {"content", content}};
  nlohmann::json choice = nlohmann::json::object();
  choice["message"] = msg;
  nlohmann::json body = nlohmann::json::object();
  body["choices"] = nlohmann::json::array({choice});
  return body.dump();
}

FactSheet ring_facts(int n, double freq, double rc) {
  FactSheet f;
  f.conductor_count = n;
  f.layout_descriptor = "circular arrangement (circle)";
  f.conductor_radius = rc;
  f.boundary_radius = 0.05;
  f.frequency = freq;
  f.skin_depth = freq > 0 ? 1.0 / std::sqrt(std::numbers::pi * freq * 4e-7 * std::numbers::pi * 58.1e6)
                          : std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double t = 2 * std::numbers::pi * i / n;
    f.conductors.push_back({{0.03 * std::cos(t), 0.03 * std::sin(t)}, {1.0, 0.0}, 1e-4});
  }
  f.total_loss = 1e-4 * n;
  f.proximity = n > 1 && freq > 0;
  return f;
}

}  // namespace

TEST_SUITE("genai") {

TEST_CASE("render substitutes the input verbatim and collapses doubled braces") {
  const auto& t = builtin_template(TemplateId::LayoutGen);
  const std::string input = "Run an initial mqs simulation using only one conductor";
  const auto p = render_prompt(t, input);
  CHECK(p.find(input) != std::string::npos);
  CHECK(p.find("{{") == std::string::npos);
  CHECK(p.find("}}") == std::string::npos);
  CHECK(p.find("{user_input}") == std::string::npos);
  // the examples keep their literal single braces
  CHECK(p.find('{') != std::string::npos);
  CHECK(p.size() > input.size());

  PromptTemplate lit{TemplateId::LayoutGen, "a {{b}} {user_input} }}c", "user_input"};
  CHECK(render_prompt(lit, "X") == "a {b} X }c");
}

TEST_CASE("render rejects blank input and malformed templates") {
  const auto& t = builtin_template(TemplateId::LayoutGen);
  CHECK_THROWS_AS(render_prompt(t, ""), BlankPrompt);
  CHECK_THROWS_AS(render_prompt(t, " \n\t "), BlankPrompt);

  CHECK_THROWS_AS(check_template({TemplateId::LayoutGen, "no placeholder", "user_input"}), MissingPlaceholder);
  CHECK_THROWS_AS(check_template({TemplateId::LayoutGen, "{user_input} {user_input}", "user_input"}), MissingPlaceholder);
  CHECK_THROWS_AS(check_template({TemplateId::LayoutGen, "lone { brace {user_input}", "user_input"}), MissingPlaceholder);
  CHECK_THROWS_AS(render_prompt({TemplateId::LayoutGen, "{other} {user_input}", "user_input"}, "x"),
                  MissingPlaceholder);
  CHECK(render_prompt({TemplateId::LayoutGen, "{other} {user_input}", "user_input"}, "x", {{"other", "o"}}) == "o x");

  for (auto id : {TemplateId::LayoutGen, TemplateId::DslWithExamples, TemplateId::DslWithoutExamples,
                  TemplateId::Summary})
    CHECK_NOTHROW(check_template(builtin_template(id)));
}

TEST_CASE("render is injective in the input") {
  const auto& t = builtin_template(TemplateId::DslWithExamples);
  std::set<std::string> seen;
  const char* inputs[] = {"a", "b", "a ", "ab", "{a}", "a}", "x y", "x  y"};
  for (auto s : inputs) seen.insert(render_prompt(t, s));
  CHECK(seen.size() == std::size(inputs));
}

TEST_CASE("stub returns the circle fixture without any transport call") {
  ProviderConfig c;
  int calls = 0;
  Transport counting = [&](const HttpRequest&) {
    ++calls;
    return HttpResponse{200, ok_body("x")};
  };
  const auto rec = complete(c, {TemplateId::LayoutGen, kCirclePrompt, "ignored"}, counting);
  CHECK(calls == 0);
  CHECK(rec.provider == ProviderKind::Stub);
  CHECK(rec.attempts == 1);
  const auto pts = layout::evaluate_layout(layout::parse_layout(rec.cleaned));
  REQUIRE(pts.size() == 12);
  for (const auto& p : pts) CHECK(std::hypot(p.x, p.y) == doctest::Approx(0.03).epsilon(1e-12));

  // normalization: case, whitespace and the final period do not matter
  const auto again = complete(c, {TemplateId::LayoutGen,
                                  "run an eddy current simulation model using 12 conductors   following the pattern "
                                  "of a circle with radius r = 0.03 m",
                                  ""});
  CHECK(again.raw == rec.raw);
}

TEST_CASE("stub fallback produces a parseable layout with the stated count") {
  ProviderConfig c;
  for (const char* p : {"Place 6 conductors on a circle", "use eight conductors along the y-axis",
                        "a 3 x 4 grid of 12 conductors", "five conductors in a row"}) {
    const auto rec = complete(c, {TemplateId::LayoutGen, p, ""});
    const auto pts = layout::evaluate_layout(layout::parse_layout(rec.cleaned));
    CHECK(static_cast<int>(pts.size()) == stated_conductor_count(p).value());
  }
}

TEST_CASE("http provider needs the key before touching the network") {
  ::unsetenv("EMSIM_TEST_UNSET_KEY");
  int calls = 0;
  Transport counting = [&](const HttpRequest&) {
    ++calls;
    return HttpResponse{200, ok_body("x")};
  };
  CHECK_THROWS_AS(complete(http_config("EMSIM_TEST_UNSET_KEY"), {TemplateId::LayoutGen, "hi", "p"}, counting),
                  AuthMissing);
  CHECK(calls == 0);
}

TEST_CASE("http provider retries transport failures and 5xx") {
  ::setenv("EMSIM_TEST_KEY", "secret", 1);
  const auto cfg = http_config("EMSIM_TEST_KEY");

  int calls = 0;
  Transport flaky = [&](const HttpRequest& r) -> HttpResponse {
    ++calls;
    CHECK(r.body.find("\"model\"") != std::string::npos);
    bool auth = false;
    for (const auto& [k, v] : r.headers) auth = auth || (k == "Authorization" && v == "Bearer secret");
    CHECK(auth);
    if (calls == 1) throw TransportError("connection reset", false);
    if (calls == 2) return {503, "busy"};
    return {200, ok_body("```\npoint(0, 0)\n```")};
  };
  const auto rec = complete(cfg, {TemplateId::LayoutGen, "hi", "p"}, flaky);
  CHECK(rec.attempts == 3);
  CHECK(rec.retry_log.size() == 2);
  CHECK(rec.provider == ProviderKind::Http);
  CHECK(rec.cleaned == "point(0, 0)");

  calls = 0;
  Transport slow = [&](const HttpRequest&) -> HttpResponse {
    ++calls;
    throw TransportError("read timed out", true);
  };
  CHECK_THROWS_AS(complete(cfg, {TemplateId::LayoutGen, "hi", "p"}, slow), Timeout);
  CHECK(calls == 3);

  Transport down = [&](const HttpRequest&) -> HttpResponse { return {502, "bad gateway"}; };
  CHECK_THROWS_AS(complete(cfg, {TemplateId::LayoutGen, "hi", "p"}, down), ProviderUnavailable);

  Transport denied = [&](const HttpRequest&) -> HttpResponse { return {401, "no"}; };
  CHECK_THROWS_AS(complete(cfg, {TemplateId::LayoutGen, "hi", "p"}, denied), ProviderUnavailable);

  Transport garbage = [&](const HttpRequest&) -> HttpResponse { return {200, "{not json"}; };
  CHECK_THROWS_AS(complete(cfg, {TemplateId::LayoutGen, "hi", "p"}, garbage), ProviderUnavailable);
  ::unsetenv("EMSIM_TEST_KEY");
}

TEST_CASE("clean_output strips fences and blank edges, idempotently") {
  CHECK(clean_output("```\nfoo\n```") == "foo");
  CHECK(clean_output("```layout\nfoo\nbar\n```\n") == "foo\nbar");
  CHECK(clean_output("\n\n  foo\n\n") == "  foo");
  const std::string plain = "point(1, 2)\npoint(3, 4)";
  CHECK(clean_output(plain) == plain);
  for (const char* s : {"```\na\n\n```\n\n", "\n```x\n```\n", "a\n\nb", "", "\n", "  ```  \n{x}\n"}) {
    const auto once = clean_output(s);
    CHECK(clean_output(once) == once);
  }
}

TEST_CASE("stated conductor count") {
  CHECK(stated_conductor_count(kCirclePrompt) == 12);
  CHECK(stated_conductor_count("Run an initial mqs simulation using only one conductor") == 1);
  CHECK(stated_conductor_count("Using nine conductors that are positioned along a rectangle") == 9);
  CHECK(stated_conductor_count("with 100 conductors arranged in a 10 x 10 grid") == 100);
  CHECK(stated_conductor_count("a single conductor") == 1);
  CHECK_FALSE(stated_conductor_count("Run a minimal magnetoquasistatic simulation with some initial points"));
  CHECK_FALSE(stated_conductor_count("a proper number of conductors"));
}

TEST_CASE("template summary states the facts") {
  const auto ten = template_summary(ring_facts(10, 50, 5e-3));
  CHECK(ten.find("10 conductors") != std::string::npos);
  CHECK(ten.find("circular") != std::string::npos);
  CHECK(ten.find("skin and proximity") != std::string::npos);
  CHECK(stated_conductor_count(ten) == 10);

  const auto one = template_summary(ring_facts(1, 50, 5e-3));
  CHECK(one.find("proximity") == std::string::npos);
  CHECK(one.find("1 conductor ") != std::string::npos);

  // skin depth at 50 Hz in copper is ~9.3 mm, larger than a 5 mm radius
  CHECK(ten.find("near-uniform") != std::string::npos);
  const auto hf = template_summary(ring_facts(10, 10e3, 5e-3));
  CHECK(hf.find("near-uniform") == std::string::npos);

  const auto dc = template_summary(ring_facts(3, 0, 5e-3));
  CHECK(dc.find("proximity") == std::string::npos);

  auto plotted = ring_facts(10, 50, 5e-3);
  plotted.artifacts.push_back({"Results/p_V_every_second.vtk", "OhmicLossDensity_every_second",
                               {"Omega_c_1", "Omega_c_3", "Omega_c_5", "Omega_c_7", "Omega_c_9"}});
  const auto s = template_summary(plotted);
  CHECK(s.find("1, 3, 5, 7 and 9") != std::string::npos);

  const auto rec = summarize(ProviderConfig{}, plotted, "first stage");
  CHECK(rec.cleaned == s);
  CHECK(rec.id == TemplateId::Summary);
}

}  // TEST_SUITE
