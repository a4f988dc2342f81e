#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "emsim/pipeline.hpp"

namespace emsim::pipeline {

std::string_view to_string(Layer l) {
  switch (l) {
    case Layer::LayoutSyntax: return "layout_syntax";
    case Layer::LayoutSemantics: return "layout_semantics";
    case Layer::GeometrySyntax: return "geometry_syntax";
    case Layer::GeometrySemantics: return "geometry_semantics";
    case Layer::DslSyntax: return "dsl_syntax";
    case Layer::DslSemantics: return "dsl_semantics";
    case Layer::PhysicsSyntax: return "physics_syntax";
    case Layer::PhysicsSemantics: return "physics_semantics";
    case Layer::SummarySyntax: return "summary_syntax";
    case Layer::SummarySemantics: return "summary_semantics";
  }
  return "?";
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::Failed: return "failed";
    case Status::Skipped: return "skipped";
    case Status::NeedsHuman: return "needs_human";
  }
  return "?";
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::LayoutOnly: return "layout_only";
    case Mode::WithPost: return "with_post";
    case Mode::WithPostAndSummary: return "with_post_and_summary";
  }
  return "?";
}

std::optional<Mode> mode_from_string(std::string_view s) {
  for (auto m : {Mode::LayoutOnly, Mode::WithPost, Mode::WithPostAndSummary})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

ValidationVerdict::ValidationVerdict() {
  for (std::size_t i = 0; i < kLayerCount; ++i) layers[i].layer = static_cast<Layer>(i);
}

std::optional<Layer> ValidationVerdict::first_failure() const {
  for (const auto& l : layers)
    if (l.status == Status::Failed) return l.layer;
  return std::nullopt;
}

namespace {

std::pair<Layer, Layer> span(Stage s) {
  switch (s) {
    case Stage::Layout: return {Layer::LayoutSyntax, Layer::LayoutSemantics};
    case Stage::Geometry: return {Layer::GeometrySyntax, Layer::GeometrySemantics};
    case Stage::Dsl: return {Layer::DslSyntax, Layer::PhysicsSemantics};
    case Stage::Summary: return {Layer::SummarySyntax, Layer::SummarySemantics};
  }
  return {Layer::LayoutSyntax, Layer::LayoutSyntax};
}

// layer hit by a non-ok outcome, and what it becomes
std::pair<Layer, Status> target(Outcome o) {
  switch (o) {
    case Outcome::LayoutParseError: return {Layer::LayoutSyntax, Status::Failed};
    case Outcome::LayoutRuntimeError: return {Layer::LayoutSemantics, Status::Failed};
    case Outcome::InvalidGeometry: return {Layer::GeometrySyntax, Status::Failed};
    case Outcome::GeometryViolation:
    case Outcome::IntentMismatch: return {Layer::GeometrySemantics, Status::Failed};
    case Outcome::IntentUnverifiable: return {Layer::GeometrySemantics, Status::NeedsHuman};
    case Outcome::DslParseError: return {Layer::DslSyntax, Status::Failed};
    case Outcome::DslResolutionError: return {Layer::DslSemantics, Status::Failed};
    case Outcome::DslKindError: return {Layer::PhysicsSyntax, Status::Failed};
    case Outcome::PhysicsLint: return {Layer::PhysicsSemantics, Status::Failed};
    case Outcome::SummaryMalformed: return {Layer::SummarySyntax, Status::Failed};
    case Outcome::SummaryMismatch: return {Layer::SummarySemantics, Status::Failed};
    case Outcome::SummaryUnverifiable: return {Layer::SummarySemantics, Status::NeedsHuman};
    case Outcome::Ok: break;
  }
  return {Layer::LayoutSyntax, Status::Ok};
}

}  // namespace

ValidationVerdict classify(const std::vector<StageOutcome>& outcomes) {
  ValidationVerdict v;
  for (const auto& o : outcomes) {
    const auto [first, last] = span(o.stage);
    const auto [hit, status] = o.outcome == Outcome::Ok ? std::pair{last, Status::Ok} : target(o.outcome);
    for (auto i = static_cast<int>(first); i <= static_cast<int>(last); ++i) {
      auto& l = v.layers[i];
      l.status = i == static_cast<int>(hit) ? status : Status::Ok;
      if (i == static_cast<int>(hit)) l.diagnostics = o.diagnostics;
    }
  }
  bool failed = false;
  for (auto& l : v.layers) {
    if (failed) {
      l.status = Status::Skipped;
      l.diagnostics.clear();
    }
    failed = failed || l.status == Status::Failed;
  }
  return v;
}

// ------------------------------------------------------------------ intent

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool has_word(const std::string& text, const std::string& word) {
  const std::regex re("\\b" + word + "\\b");
  return std::regex_search(text, re);
}

int distinct(std::vector<double> v, double tol) {
  std::sort(v.begin(), v.end());
  int n = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (i == 0 || v[i] - v[i - 1] > tol) ++n;
  return n;
}

}  // namespace

IntentCheck check_intent(std::string_view prompt, const std::vector<Point2>& points) {
  const std::string text = genai::normalize_input(prompt);
  IntentCheck out;
  std::vector<std::string> failures;
  int checks = 0;

  double scale = 1e-3;
  for (const auto& p : points) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double tol = 1e-9 * scale;

  if (auto n = genai::stated_conductor_count(text)) {
    ++checks;
    if (static_cast<int>(points.size()) != *n)
      failures.push_back("prompt asks for " + std::to_string(*n) + " conductors, layout has " +
                         std::to_string(points.size()));
  }

  if (const auto at = text.find("circle"); at != std::string::npos && !points.empty()) {
    ++checks;
    const Point2 c = geometry::centroid(points);
    double mean = 0.0;
    for (const auto& p : points) mean += distance(p, c);
    mean /= static_cast<double>(points.size());
    double spread = 0.0;
    for (const auto& p : points) spread = std::max(spread, std::abs(distance(p, c) - mean));
    if (spread > tol) failures.push_back("points are not on a common circle (radius spread " + num(spread) + " m)");

    static const std::regex radius_re(R"(radius\s*(?:r\s*)?(?:=|of)?\s*([0-9]*\.?[0-9]+(?:e-?[0-9]+)?)\s*(mm|cm|m)\b)");
    const std::string tail = text.substr(at);
    std::smatch m;
    if (std::regex_search(tail, m, radius_re)) {
      const double unit = m[2] == "mm" ? 1e-3 : m[2] == "cm" ? 1e-2 : 1.0;
      const double want = std::stod(m[1]) * unit;
      if (std::abs(mean - want) > 1e-6 * want)
        failures.push_back("circle radius is " + num(mean) + " m, prompt asks for " + num(want) + " m");
    }
  }

  const bool x_axis = has_word(text, "x-axis") || has_word(text, "x axis");
  const bool y_axis = has_word(text, "y-axis") || has_word(text, "y axis");
  if (x_axis || y_axis) {
    ++checks;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const bool on_x = std::abs(points[i].y) <= tol, on_y = std::abs(points[i].x) <= tol;
      const bool ok = (x_axis && on_x) || (y_axis && on_y);
      if (!ok) {
        failures.push_back("conductor " + std::to_string(i + 1) + " at (" + num(points[i].x) + ", " +
                           num(points[i].y) + ") is off the " + (x_axis && y_axis ? "axes" : x_axis ? "x-axis" : "y-axis"));
        break;
      }
    }
  }

  static const std::regex grid_re(R"((\d+)\s*x\s*(\d+))");
  std::smatch g;
  if (text.find("grid") != std::string::npos && std::regex_search(text, g, grid_re)) {
    ++checks;
    const int a = std::stoi(g[1]), b = std::stoi(g[2]);
    if (static_cast<long>(points.size()) != static_cast<long>(a) * b)
      failures.push_back("a " + std::to_string(a) + " x " + std::to_string(b) + " grid has " + std::to_string(a * b) +
                         " points, layout has " + std::to_string(points.size()));
    std::vector<double> xs, ys;
    for (const auto& p : points) {
      xs.push_back(p.x);
      ys.push_back(p.y);
    }
    // packed grids shift alternate rows, so either the rows or the columns line up
    const int nx = distinct(xs, tol), ny = distinct(ys, tol);
    const bool rows = nx == a || nx == b || ny == a || ny == b;
    if (!rows) failures.push_back("neither rows nor columns match a " + std::to_string(a) + " x " + std::to_string(b) + " grid");
  }

  static const char* const vague[] = {"square",   "rectangle", "triangle", "triangular", "letter",  "outline",
                                      "curve",    "sin",       "cos",      "parabola",   "parametrization",
                                      "trapezoid", "trapezoidal", "slot",  "spiral",     "vertices", "vertex",
                                      "star",     "polygon",   "diagonal", "bisector",   "ellipse", "random",
                                      "shape",    "line",      "row",      "form"};
  std::vector<std::string> unverifiable;
  for (const char* w : vague)
    if (has_word(text, w)) unverifiable.emplace_back(w);

  if (!failures.empty()) {
    out.outcome = Outcome::IntentMismatch;
    out.diagnostics = std::move(failures);
  } else if (!unverifiable.empty()) {
    out.outcome = Outcome::IntentUnverifiable;
    std::string words;
    for (const auto& w : unverifiable) words += (words.empty() ? "" : ", ") + w;
    out.diagnostics.push_back("shape wording (" + words + ") cannot be machine-checked; inspect the layout");
  } else if (checks == 0) {
    out.outcome = Outcome::IntentUnverifiable;
    out.diagnostics.push_back("prompt states nothing checkable about the geometry; inspect the layout");
  }
  return out;
}

}  // namespace emsim::pipeline
