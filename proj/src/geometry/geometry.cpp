#include "emsim/geometry.hpp"

#include <algorithm>

namespace emsim::geometry {

Point2 centroid(const std::vector<Point2>& centers) {
  if (centers.empty()) throw EmptyLayout();
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& p : centers) {
    sx += p.x;
    sy += p.y;
  }
  const auto n = static_cast<double>(centers.size());
  return {sx / n, sy / n};
}

DomainBoundary boundary(const ConductorLayout& layout) {
  const Point2 c = centroid(layout.centers);
  double reach = 0.0;
  for (const auto& p : layout.centers) reach = std::max(reach, distance(p, c));
  return {c, reach + layout.boundary_margin_m};
}

std::vector<std::pair<std::size_t, std::size_t>> check_overlap(const ConductorLayout& layout) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const double min_sep = 2.0 * layout.radius_m * (1.0 + kOverlapTolerance);
  const auto& c = layout.centers;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      if (distance(c[i], c[j]) < min_sep) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

double skin_depth(const MaterialSpec& material, const ExcitationSpec& excitation) {
  if (!(material.conductivity_S_per_m > 0.0)) throw NonConductive();
  const double omega = excitation.angular_frequency();
  const double mu = 1.0 / material.reluctivity;
  return std::sqrt(2.0 / (omega * mu * material.conductivity_S_per_m));
}

void validate(const ConductorLayout& layout) {
  if (layout.centers.empty()) throw EmptyLayout();
  for (std::size_t i = 0; i < layout.centers.size(); ++i) {
    const auto& p = layout.centers[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw GeometryError("conductor " + std::to_string(i) + " has a non-finite center");
  }
  if (!(layout.radius_m > 0.0) || !std::isfinite(layout.radius_m))
    throw GeometryError("conductor radius must be positive");
  if (!(layout.boundary_margin_m > 0.0) || !std::isfinite(layout.boundary_margin_m))
    throw GeometryError("boundary margin must be positive");
}

void validate(const ExcitationSpec& excitation) {
  if (!std::isfinite(excitation.current_amplitude_A))
    throw GeometryError("current amplitude must be finite");
  if (!(excitation.frequency_Hz >= 0.0) || !std::isfinite(excitation.frequency_Hz))
    throw GeometryError("frequency must be finite and non-negative");
}

void validate(const MaterialSpec& material) {
  if (!(material.conductivity_S_per_m >= 0.0)) throw GeometryError("conductivity must be >= 0");
  if (!(material.reluctivity > 0.0)) throw GeometryError("reluctivity must be > 0");
}

}  // namespace emsim::geometry
