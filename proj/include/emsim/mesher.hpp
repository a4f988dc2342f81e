#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "emsim/geometry.hpp"

namespace emsim::mesh {

struct MeshSizeSpec {
  double h_conductor_m = 0.0;
  double h_far_m = 0.0;
  double gradation = 1.5;

  /// h_conductor = r_c / 6, h_far = boundary radius / 10, gradation 1.5.
  static MeshSizeSpec defaults(const geometry::ConductorLayout& layout,
                               const geometry::DomainBoundary& boundary);
};

struct Triangle {
  std::array<int, 3> v{};
  int tag = 0;
};

struct BoundaryEdge {
  std::array<int, 2> v{};
  int tag = 0;
};

/// Conforming P1 triangulation of the circular domain. Region tags:
/// `Omega_c_i` = i (1-based, layout order), `Omega_i` = N + 1,
/// `Gamma_out` = N + 2.
struct TriMesh {
  std::vector<Point2> nodes;
  std::vector<Triangle> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::map<std::string, int> groups;

  int conductor_count() const;
  int insulator_tag() const { return conductor_count() + 1; }
  int boundary_tag() const { return conductor_count() + 2; }

  /// Signed area (positive for counter-clockwise triangles).
  double area(std::size_t t) const;
  Point2 centroid(std::size_t t) const;
};

struct MeshOptions {
  double min_angle_deg = 21.0;
  /// A triangle is split while one of its edges is longer than
  /// `max_edge_ratio` times the size field at the edge midpoint.
  double max_edge_ratio = 1.5;
  std::size_t max_vertices = 2'000'000;
};

class MeshFailure : public Error {
 public:
  explicit MeshFailure(const std::string& what) : Error("MeshFailure", what) {}
};

/// max(16, ceil(2 pi r / h)) equally spaced counter-clockwise vertices,
/// the first at angle zero.
std::vector<Point2> discretize_circle(Point2 center, double radius, double h);

/// Far-field size actually used: h_far, capped so the field's slope
/// between r_c and d_bnd never exceeds gradation - 1.
double effective_far_size(const geometry::ConductorLayout& layout, const MeshSizeSpec& sizes);

double size_field(Point2 point, const geometry::ConductorLayout& layout,
                  const geometry::DomainBoundary& boundary, const MeshSizeSpec& sizes);

/// Conforming Delaunay refinement of the domain disk with all conductor
/// disks as embedded circular boundaries. The mesh is computed in the
/// frame centered at `boundary.center` and translated back at the end.
TriMesh generate_mesh(const geometry::ConductorLayout& layout,
                      const geometry::DomainBoundary& boundary, const MeshSizeSpec& sizes,
                      const MeshOptions& options = {});

/// Same sizes with every length scaled by `factor` (uniform refinement for factor < 1).
MeshSizeSpec scaled(const MeshSizeSpec& sizes, double factor);

}  // namespace emsim::mesh
