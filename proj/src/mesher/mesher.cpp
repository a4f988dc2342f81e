#include "emsim/mesher.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "delaunay.hpp"

namespace emsim::mesh {

using geometry::ConductorLayout;
using geometry::DomainBoundary;

int TriMesh::conductor_count() const {
  int n = 0;
  for (const auto& [name, tag] : groups)
    if (name.rfind("Omega_c_", 0) == 0) ++n;
  return n;
}

double TriMesh::area(std::size_t t) const {
  const auto& v = triangles[t].v;
  const Point2 a = nodes[static_cast<std::size_t>(v[0])];
  const Point2 b = nodes[static_cast<std::size_t>(v[1])];
  const Point2 c = nodes[static_cast<std::size_t>(v[2])];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

Point2 TriMesh::centroid(std::size_t t) const {
  const auto& v = triangles[t].v;
  const Point2 a = nodes[static_cast<std::size_t>(v[0])];
  const Point2 b = nodes[static_cast<std::size_t>(v[1])];
  const Point2 c = nodes[static_cast<std::size_t>(v[2])];
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

MeshSizeSpec MeshSizeSpec::defaults(const ConductorLayout& layout, const DomainBoundary& boundary) {
  MeshSizeSpec s;
  s.h_conductor_m = layout.radius_m / 6.0;
  s.h_far_m = std::max(boundary.radius_m / 10.0, s.h_conductor_m);
  s.gradation = 1.5;
  return s;
}

MeshSizeSpec scaled(const MeshSizeSpec& sizes, double factor) {
  MeshSizeSpec s = sizes;
  s.h_conductor_m *= factor;
  s.h_far_m *= factor;
  return s;
}

std::vector<Point2> discretize_circle(Point2 center, double radius, double h) {
  const double exact = 2.0 * std::numbers::pi * radius / h;
  // guard against 94.0000000001 style round-up from the division
  const auto m = static_cast<std::size_t>(std::max(16.0, std::ceil(exact - 1e-9)));
  std::vector<Point2> out;
  out.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
    out.push_back({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
  }
  return out;
}

double effective_far_size(const ConductorLayout& layout, const MeshSizeSpec& sizes) {
  const double span = layout.boundary_margin_m - layout.radius_m;
  if (span <= 0.0) return sizes.h_conductor_m;
  const double cap = sizes.h_conductor_m + (sizes.gradation - 1.0) * span;
  return std::max(sizes.h_conductor_m, std::min(sizes.h_far_m, cap));
}

namespace {

double size_from_distance(double d, double inner, double outer, double h_c, double h_far) {
  if (d <= inner) return h_c;
  if (d >= outer) return h_far;
  const double t = (d - inner) / (outer - inner);
  return h_c + t * (h_far - h_c);
}

void validate_sizes(const MeshSizeSpec& s) {
  if (!(s.h_conductor_m > 0.0) || !(s.h_far_m >= s.h_conductor_m) || !(s.gradation >= 1.0))
    throw geometry::GeometryError("mesh sizes must satisfy 0 < h_conductor <= h_far, gradation >= 1");
}

}  // namespace

double size_field(Point2 point, const ConductorLayout& layout, const DomainBoundary& boundary,
                  const MeshSizeSpec& sizes) {
  (void)boundary;
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : layout.centers) d = std::min(d, distance(point, c));
  return size_from_distance(d, layout.radius_m, layout.boundary_margin_m, sizes.h_conductor_m,
                            effective_far_size(layout, sizes));
}

namespace {

using detail::Triangulation;

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint32_t>(std::min(a, b));
  const auto hi = static_cast<std::uint32_t>(std::max(a, b));
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

struct Circle {
  Point2 center;
  double radius = 0.0;
  double max_half_angle = 0.0;
  std::vector<int> segments;  // ids into Refiner::segs_, dead ones skipped
};

struct Segment {
  int a = -1;
  int b = -1;
  int circle = -1;
  double theta_a = 0.0;
  double span = 0.0;  // counter-clockwise angular extent from a to b
  bool alive = false;
};

class Refiner {
 public:
  Refiner(const ConductorLayout& local, const MeshSizeSpec& sizes, double outer_radius,
          const MeshOptions& opts)
      : layout_(local),
        sizes_(sizes),
        h_far_(effective_far_size(local, sizes)),
        outer_radius_(outer_radius),
        opts_(opts),
        dt_(outer_radius) {
    const double sin_min = std::sin(opts.min_angle_deg * std::numbers::pi / 180.0);
    max_ratio_ = 1.0 / (2.0 * sin_min);
  }

  void build() {
    add_circle({0.0, 0.0}, outer_radius_, h_far_);
    for (const auto& c : layout_.centers) add_circle(c, layout_.radius_m, sizes_.h_conductor_m);
    for (std::size_t s = 0; s < segs_.size(); ++s) seg_queue_.push_back(static_cast<int>(s));
    refine();
  }

  TriMesh extract() const;

 private:
  double h_at(Point2 p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : layout_.centers) d = std::min(d, distance(p, c));
    return size_from_distance(d, layout_.radius_m, layout_.boundary_margin_m,
                              sizes_.h_conductor_m, h_far_);
  }

  void add_circle(Point2 center, double radius, double h) {
    // Chords at least h long, so a later midpoint split never drops below h/2.
    std::size_t m = 16;
    while (2.0 * radius * std::sin(std::numbers::pi / static_cast<double>(m + 1)) >= h) ++m;
    std::vector<Point2> pts;
    for (std::size_t k = 0; k < m; ++k) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
      pts.push_back({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
    }
    const int ci = static_cast<int>(circles_.size());
    Circle circle;
    circle.center = center;
    circle.radius = radius;
    circle.max_half_angle = std::numbers::pi / static_cast<double>(pts.size());
    circles_.push_back(circle);
    std::vector<int> ids;
    for (const auto& p : pts) ids.push_back(insert_vertex(p));
    const double step = 2.0 * std::numbers::pi / static_cast<double>(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      Segment s;
      s.a = ids[k];
      s.b = ids[(k + 1) % ids.size()];
      s.circle = ci;
      s.theta_a = step * static_cast<double>(k);
      s.span = step;
      add_segment(s);
    }
  }

  void add_segment(Segment s) {
    s.alive = true;
    const int id = static_cast<int>(segs_.size());
    segs_.push_back(s);
    seg_of_edge_[edge_key(s.a, s.b)] = id;
    circles_[static_cast<std::size_t>(s.circle)].segments.push_back(id);
  }

  int insert_vertex(Point2 p, int hint = -1) {
    if (dt_.vertex_count() >= opts_.max_vertices + Triangulation::kSuperVertices)
      throw MeshFailure("mesh refinement exceeded " + std::to_string(opts_.max_vertices) +
                        " vertices");
    auto ins = dt_.insert(p, hint);
    if (ins.duplicate) return ins.vertex;
    for (const auto& [a, b] : ins.removed_edges) {
      auto it = seg_of_edge_.find(edge_key(a, b));
      if (it != seg_of_edge_.end()) seg_queue_.push_back(it->second);
    }
    for (int t : ins.created) {
      tri_queue_.push_back(t);
      const auto& tr = dt_.tri(t);
      // the new vertex is the apex of every triangle on the cavity rim
      auto it = seg_of_edge_.find(edge_key(tr.v[0], tr.v[1]));
      if (it != seg_of_edge_.end()) seg_queue_.push_back(it->second);
    }
    return ins.vertex;
  }

  static bool in_diametral_circle(Point2 a, Point2 b, Point2 p) {
    const double dot = (a.x - p.x) * (b.x - p.x) + (a.y - p.y) * (b.y - p.y);
    const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    return dot < -1e-10 * len2;
  }

  bool encroached(const Segment& s) const {
    int slot = -1;
    int t = dt_.find_edge(s.a, s.b, &slot);
    if (t < 0) t = dt_.find_edge(s.b, s.a, &slot);
    if (t < 0) return true;  // a missing segment is never Gabriel
    const auto& pts = dt_.points();
    const Point2 a = pts[static_cast<std::size_t>(s.a)];
    const Point2 b = pts[static_cast<std::size_t>(s.b)];
    const auto& tr = dt_.tri(t);
    const int apex = tr.v[slot];
    if (!dt_.is_super(apex) && in_diametral_circle(a, b, pts[static_cast<std::size_t>(apex)]))
      return true;
    const int other = tr.nb[slot];
    if (other >= 0) {
      for (int v : dt_.tri(other).v) {
        if (v == s.a || v == s.b || dt_.is_super(v)) continue;
        if (in_diametral_circle(a, b, pts[static_cast<std::size_t>(v)])) return true;
      }
    }
    return false;
  }

  std::vector<int> segments_encroached_by(Point2 p) const {
    std::vector<int> out;
    const auto& pts = dt_.points();
    for (const auto& c : circles_) {
      const double d = distance(p, c.center);
      const double cs = std::cos(c.max_half_angle);
      const double sn = std::sin(c.max_half_angle);
      if (d < c.radius * (cs - sn) || d > c.radius * (cs + sn)) continue;
      for (int id : c.segments) {
        const Segment& s = segs_[static_cast<std::size_t>(id)];
        if (!s.alive) continue;
        if (in_diametral_circle(pts[static_cast<std::size_t>(s.a)],
                                pts[static_cast<std::size_t>(s.b)], p))
          out.push_back(id);
      }
    }
    return out;
  }

  void split(int id) {
    Segment old = segs_[static_cast<std::size_t>(id)];
    segs_[static_cast<std::size_t>(id)].alive = false;
    seg_of_edge_.erase(edge_key(old.a, old.b));
    const Circle& c = circles_[static_cast<std::size_t>(old.circle)];
    const double tm = old.theta_a + 0.5 * old.span;
    const Point2 m{c.center.x + c.radius * std::cos(tm), c.center.y + c.radius * std::sin(tm)};
    int hint = dt_.find_edge(old.a, old.b);
    if (hint < 0) hint = dt_.find_edge(old.b, old.a);
    const int mv = insert_vertex(m, hint);
    Segment left = old;
    left.b = mv;
    left.span = 0.5 * old.span;
    Segment right = old;
    right.a = mv;
    right.theta_a = tm;
    right.span = 0.5 * old.span;
    add_segment(left);
    add_segment(right);
    seg_queue_.push_back(static_cast<int>(segs_.size()) - 2);
    seg_queue_.push_back(static_cast<int>(segs_.size()) - 1);
    ++splits_;
  }

  void drain_segments() {
    while (!seg_queue_.empty()) {
      const int id = seg_queue_.front();
      seg_queue_.pop_front();
      const Segment& s = segs_[static_cast<std::size_t>(id)];
      if (s.alive && encroached(s)) split(id);
    }
  }

  bool is_bad(int t, Point2* center) const {
    const auto& tr = dt_.tri(t);
    if (!tr.alive) return false;
    for (int v : tr.v)
      if (dt_.is_super(v)) return false;
    const auto& pts = dt_.points();
    const Point2 p0 = pts[static_cast<std::size_t>(tr.v[0])];
    const Point2 p1 = pts[static_cast<std::size_t>(tr.v[1])];
    const Point2 p2 = pts[static_cast<std::size_t>(tr.v[2])];
    const double l0 = distance(p1, p2);
    const double l1 = distance(p2, p0);
    const double l2 = distance(p0, p1);
    const double area2 = detail::orient(p0, p1, p2);
    if (!(area2 > 0.0)) return false;
    const double circum_r = l0 * l1 * l2 / (2.0 * area2);
    const double shortest = std::min({l0, l1, l2});
    bool bad = circum_r / shortest > max_ratio_;
    if (!bad) {
      const std::array<std::pair<Point2, Point2>, 3> edges{{{p1, p2}, {p2, p0}, {p0, p1}}};
      const std::array<double, 3> lens{l0, l1, l2};
      for (int k = 0; k < 3 && !bad; ++k) {
        const Point2 mid = 0.5 * (edges[k].first + edges[k].second);
        bad = lens[k] > opts_.max_edge_ratio * h_at(mid);
      }
    }
    if (bad) *center = detail::circumcenter(p0, p1, p2);
    return bad;
  }

  void refine() {
    for (std::size_t t = 0; t < dt_.triangles().size(); ++t) tri_queue_.push_back(static_cast<int>(t));
    std::size_t guard = 0;
    const std::size_t cap = 40 * opts_.max_vertices;
    for (;;) {
      drain_segments();
      if (tri_queue_.empty()) break;
      if (++guard > cap) throw MeshFailure("mesh refinement did not converge");
      const int t = tri_queue_.front();
      tri_queue_.pop_front();
      Point2 c;
      if (!is_bad(t, &c)) continue;
      const auto hit = segments_encroached_by(c);
      if (!hit.empty()) {
        // a rejected circumcenter is not a vertex, so split unconditionally
        for (int id : hit)
          if (segs_[static_cast<std::size_t>(id)].alive) split(id);
        tri_queue_.push_back(t);
        continue;
      }
      if (norm(c) > outer_radius_) continue;  // numerically outside; leave it
      insert_vertex(c, t);
    }
  }

  ConductorLayout layout_;
  MeshSizeSpec sizes_;
  double h_far_;
  double outer_radius_;
  MeshOptions opts_;
  double max_ratio_ = 0.0;
  Triangulation dt_;
  std::vector<Circle> circles_;
  std::vector<Segment> segs_;
  std::unordered_map<std::uint64_t, int> seg_of_edge_;
  std::deque<int> seg_queue_;
  std::deque<int> tri_queue_;
  std::size_t splits_ = 0;
};

bool inside_polygon(const std::vector<Point2>& poly, Point2 p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point2 a = poly[i];
    const Point2 b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) in = !in;
    }
  }
  return in;
}

TriMesh Refiner::extract() const {
  const auto& pts = dt_.points();
  const auto& tris = dt_.triangles();
  const int n_cond = static_cast<int>(layout_.centers.size());

  std::vector<int> renumber(pts.size(), -1);
  TriMesh mesh;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tr = tris[t];
    if (!tr.alive) continue;
    if (dt_.is_super(tr.v[0]) || dt_.is_super(tr.v[1]) || dt_.is_super(tr.v[2])) continue;
    for (int v : tr.v) renumber[static_cast<std::size_t>(v)] = 0;
  }
  int next = 0;
  for (std::size_t v = 0; v < pts.size(); ++v) {
    if (renumber[v] < 0) continue;
    renumber[v] = next++;
    mesh.nodes.push_back(pts[v]);
  }

  // Conductor polygons: circle vertices ordered by angle.
  std::vector<std::vector<Point2>> polygons(static_cast<std::size_t>(n_cond));
  for (int i = 0; i < n_cond; ++i) {
    const Circle& c = circles_[static_cast<std::size_t>(i + 1)];
    std::vector<std::pair<double, Point2>> ring;
    for (int id : c.segments) {
      const Segment& s = segs_[static_cast<std::size_t>(id)];
      if (s.alive) ring.emplace_back(s.theta_a, pts[static_cast<std::size_t>(s.a)]);
    }
    std::sort(ring.begin(), ring.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    for (const auto& [theta, p] : ring) polygons[static_cast<std::size_t>(i)].push_back(p);
  }

  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tr = tris[t];
    if (!tr.alive) continue;
    if (dt_.is_super(tr.v[0]) || dt_.is_super(tr.v[1]) || dt_.is_super(tr.v[2])) continue;
    Triangle out;
    for (int k = 0; k < 3; ++k) out.v[k] = renumber[static_cast<std::size_t>(tr.v[k])];
    const Point2 a = pts[static_cast<std::size_t>(tr.v[0])];
    const Point2 b = pts[static_cast<std::size_t>(tr.v[1])];
    const Point2 c = pts[static_cast<std::size_t>(tr.v[2])];
    if (!(detail::orient(a, b, c) > 0.0)) throw MeshFailure("degenerate triangle in final mesh");
    const Point2 g{(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
    out.tag = n_cond + 1;
    for (int i = 0; i < n_cond; ++i) {
      if (distance(g, layout_.centers[static_cast<std::size_t>(i)]) >= layout_.radius_m) continue;
      if (inside_polygon(polygons[static_cast<std::size_t>(i)], g)) {
        out.tag = i + 1;
        break;
      }
    }
    mesh.triangles.push_back(out);
  }

  std::vector<std::pair<double, BoundaryEdge>> rim;
  for (int id : circles_[0].segments) {
    const Segment& s = segs_[static_cast<std::size_t>(id)];
    if (!s.alive) continue;
    BoundaryEdge e;
    e.v = {renumber[static_cast<std::size_t>(s.a)], renumber[static_cast<std::size_t>(s.b)]};
    e.tag = n_cond + 2;
    if (e.v[0] < 0 || e.v[1] < 0) throw MeshFailure("outer boundary vertex missing from mesh");
    rim.emplace_back(s.theta_a, e);
  }
  std::sort(rim.begin(), rim.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  for (const auto& [theta, e] : rim) mesh.boundary_edges.push_back(e);

  for (int i = 0; i < n_cond; ++i) mesh.groups["Omega_c_" + std::to_string(i + 1)] = i + 1;
  mesh.groups["Omega_i"] = n_cond + 1;
  mesh.groups["Gamma_out"] = n_cond + 2;
  return mesh;
}

}  // namespace

TriMesh generate_mesh(const ConductorLayout& layout, const DomainBoundary& boundary,
                      const MeshSizeSpec& sizes, const MeshOptions& options) {
  geometry::validate(layout);
  validate_sizes(sizes);
  if (!geometry::check_overlap(layout).empty())
    throw geometry::GeometryError("conductors overlap; refusing to mesh");
  if (!(layout.boundary_margin_m > layout.radius_m))
    throw geometry::GeometryError("boundary margin must exceed the conductor radius");
  // Snap the local frame to a grid well below any mesh length, so a translated
  // layout (whose local coordinates differ only by rounding) meshes identically.
  const double quantum = std::ldexp(1.0, std::ilogb(boundary.radius_m) - 40);
  const auto snap = [quantum](double v) { return std::nearbyint(v / quantum) * quantum; };
  ConductorLayout local = layout;
  for (auto& c : local.centers) {
    c = c - boundary.center;
    c = {snap(c.x), snap(c.y)};
    if (norm(c) + layout.radius_m >= boundary.radius_m)
      throw geometry::GeometryError("conductor crosses the domain boundary");
  }

  Refiner refiner(local, sizes, snap(boundary.radius_m), options);
  refiner.build();
  TriMesh mesh = refiner.extract();
  for (auto& p : mesh.nodes) p = p + boundary.center;
  return mesh;
}

}  // namespace emsim::mesh
