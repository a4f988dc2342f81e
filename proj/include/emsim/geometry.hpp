#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace emsim {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Base class of every error raised by the engine. `kind()` is a stable
/// machine-readable tag used by the pipeline classifier and the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

}  // namespace emsim

namespace emsim::geometry {

inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;

// Model problem defaults (copper conductors at mains frequency).
inline constexpr double kDefaultConductorRadius = 5.0e-3;
inline constexpr double kDefaultBoundaryMargin = 3.0 * kDefaultConductorRadius;
inline constexpr double kCopperConductivity = 58.1e6;
inline constexpr double kDefaultCurrent = 1.0;
inline constexpr double kDefaultFrequency = 50.0;

/// Relative slack on the 2 r_c separation: centers closer than
/// 2 r_c (1 + 1e-9) overlap, tangent conductors included.
inline constexpr double kOverlapTolerance = 1e-9;

struct ConductorLayout {
  std::vector<Point2> centers;
  double radius_m = kDefaultConductorRadius;
  double boundary_margin_m = kDefaultBoundaryMargin;

  std::size_t size() const { return centers.size(); }
};

struct DomainBoundary {
  Point2 center;
  double radius_m = 0.0;
};

struct ExcitationSpec {
  double current_amplitude_A = kDefaultCurrent;
  double frequency_Hz = kDefaultFrequency;

  double angular_frequency() const { return 2.0 * std::numbers::pi * frequency_Hz; }
};

struct MaterialSpec {
  double conductivity_S_per_m = kCopperConductivity;
  double reluctivity = 1.0 / kMu0;
};

class EmptyLayout : public Error {
 public:
  EmptyLayout() : Error("EmptyLayout", "layout has no conductors") {}
};

class NonConductive : public Error {
 public:
  NonConductive() : Error("NonConductive", "skin depth undefined for zero conductivity") {}
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what) : Error("GeometryError", what) {}
};

Point2 centroid(const std::vector<Point2>& centers);

DomainBoundary boundary(const ConductorLayout& layout);

/// Index pairs (i < j) whose conductors overlap or touch, in lexicographic order.
std::vector<std::pair<std::size_t, std::size_t>> check_overlap(const ConductorLayout& layout);

double skin_depth(const MaterialSpec& material, const ExcitationSpec& excitation);

/// Throws GeometryError when the layout violates the value-type invariants
/// (empty, non-finite coordinates, non-positive radius or margin). Overlap
/// is reported separately by check_overlap.
void validate(const ConductorLayout& layout);

void validate(const ExcitationSpec& excitation);
void validate(const MaterialSpec& material);

}  // namespace emsim::geometry
