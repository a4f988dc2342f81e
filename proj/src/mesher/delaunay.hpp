#pragma once

// Incremental Bowyer-Watson triangulation inside a large enclosing triangle.
// Internal to the mesher.

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "emsim/geometry.hpp"

namespace emsim::mesh::detail {

struct Tri {
  std::array<int, 3> v{};
  std::array<int, 3> nb{-1, -1, -1};  // nb[k] is across the edge opposite v[k]
  bool alive = false;
};

double orient(Point2 a, Point2 b, Point2 c);
/// > 0 when d lies strictly inside the circumcircle of the CCW triangle abc.
double incircle(Point2 a, Point2 b, Point2 c, Point2 d);
Point2 circumcenter(Point2 a, Point2 b, Point2 c);

class Triangulation {
 public:
  static constexpr int kSuperVertices = 3;

  /// `extent` bounds |x|, |y| of every point that will be inserted.
  explicit Triangulation(double extent);

  struct Inserted {
    int vertex = -1;
    bool duplicate = false;
    std::vector<std::pair<int, int>> removed_edges;  // edges of destroyed triangles
    std::vector<int> created;                        // new triangle slots
  };

  Inserted insert(Point2 p, int hint = -1);

  bool is_super(int v) const { return v < kSuperVertices; }
  const std::vector<Point2>& points() const { return pts_; }
  const std::vector<Tri>& triangles() const { return tris_; }
  const Tri& tri(int t) const { return tris_[static_cast<std::size_t>(t)]; }

  /// Triangle slot holding the directed edge a->b, or -1.
  int find_edge(int a, int b, int* slot = nullptr) const;

  std::size_t vertex_count() const { return pts_.size(); }

 private:
  int locate(Point2 p, int hint) const;
  bool contains(int t, Point2 p) const;
  int new_tri();

  std::vector<Point2> pts_;
  std::vector<Tri> tris_;
  std::vector<int> free_;
  std::vector<int> vert_tri_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  int last_ = 0;
};

}  // namespace emsim::mesh::detail
