#include "delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "emsim/mesher.hpp"

namespace emsim::mesh::detail {

double orient(Point2 a, Point2 b, Point2 c) {
  const long double abx = static_cast<long double>(b.x) - a.x;
  const long double aby = static_cast<long double>(b.y) - a.y;
  const long double acx = static_cast<long double>(c.x) - a.x;
  const long double acy = static_cast<long double>(c.y) - a.y;
  return static_cast<double>(abx * acy - aby * acx);
}

double incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const long double adx = static_cast<long double>(a.x) - d.x;
  const long double ady = static_cast<long double>(a.y) - d.y;
  const long double bdx = static_cast<long double>(b.x) - d.x;
  const long double bdy = static_cast<long double>(b.y) - d.y;
  const long double cdx = static_cast<long double>(c.x) - d.x;
  const long double cdy = static_cast<long double>(c.y) - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  const long double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                          ad * (bdx * cdy - bdy * cdx);
  return static_cast<double>(det);
}

Point2 circumcenter(Point2 a, Point2 b, Point2 c) {
  const double bx = b.x - a.x;
  const double by = b.y - a.y;
  const double cx = c.x - a.x;
  const double cy = c.y - a.y;
  const double d = 2.0 * (bx * cy - by * cx);
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  return {a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
}

Triangulation::Triangulation(double extent) {
  const double s = 50.0 * extent;
  pts_ = {{-s, -s}, {s, -s}, {0.0, s}};
  vert_tri_ = {0, 0, 0};
  const int t = new_tri();
  tris_[0].v = {0, 1, 2};
  tris_[0].nb = {-1, -1, -1};
  last_ = t;
}

int Triangulation::new_tri() {
  int t = 0;
  if (!free_.empty()) {
    t = free_.back();
    free_.pop_back();
  } else {
    t = static_cast<int>(tris_.size());
    tris_.emplace_back();
    mark_.push_back(0);
  }
  tris_[static_cast<std::size_t>(t)].alive = true;
  return t;
}

bool Triangulation::contains(int t, Point2 p) const {
  const Tri& tr = tri(t);
  for (int k = 0; k < 3; ++k) {
    if (orient(pts_[tr.v[(k + 1) % 3]], pts_[tr.v[(k + 2) % 3]], p) < 0.0) return false;
  }
  return true;
}

int Triangulation::locate(Point2 p, int hint) const {
  int t = (hint >= 0 && hint < static_cast<int>(tris_.size()) && tri(hint).alive) ? hint : last_;
  if (!tri(t).alive) {
    for (std::size_t i = 0; i < tris_.size(); ++i)
      if (tris_[i].alive) {
        t = static_cast<int>(i);
        break;
      }
  }
  const std::size_t cap = 4 * tris_.size() + 16;
  for (std::size_t step = 0; step < cap; ++step) {
    const Tri& tr = tri(t);
    bool moved = false;
    for (int j = 0; j < 3; ++j) {
      const int k = static_cast<int>((j + step) % 3);
      const Point2 a = pts_[tr.v[(k + 1) % 3]];
      const Point2 b = pts_[tr.v[(k + 2) % 3]];
      if (orient(a, b, p) < 0.0 && tr.nb[k] >= 0) {
        t = tr.nb[k];
        moved = true;
        break;
      }
    }
    if (!moved) return t;
  }
  // The walk can cycle on near-degenerate input; fall back to a scan.
  int best = -1;
  double best_score = -1e300;
  for (std::size_t i = 0; i < tris_.size(); ++i) {
    if (!tris_[i].alive) continue;
    const Tri& tr = tris_[i];
    double worst = 1e300;
    for (int k = 0; k < 3; ++k)
      worst = std::min(worst, orient(pts_[tr.v[(k + 1) % 3]], pts_[tr.v[(k + 2) % 3]], p));
    if (worst > best_score) {
      best_score = worst;
      best = static_cast<int>(i);
    }
  }
  return best;
}

int Triangulation::find_edge(int a, int b, int* slot) const {
  const int start = vert_tri_[static_cast<std::size_t>(a)];
  int t = start;
  const std::size_t cap = tris_.size() + 4;
  for (std::size_t guard = 0; guard < cap; ++guard) {
    const Tri& tr = tri(t);
    int i = 0;
    while (i < 3 && tr.v[i] != a) ++i;
    if (i == 3) return -1;  // stale incidence; should not happen
    if (tr.v[(i + 1) % 3] == b) {
      if (slot != nullptr) *slot = (i + 2) % 3;
      return t;
    }
    t = tr.nb[(i + 1) % 3];
    if (t < 0 || t == start) return -1;
  }
  return -1;
}

Triangulation::Inserted Triangulation::insert(Point2 p, int hint) {
  Inserted out;
  const int t0 = locate(p, hint);
  if (t0 < 0) throw MeshFailure("point location failed");

  const double scale = std::abs(pts_[0].x) * 1e-14;
  for (int k = 0; k < 3; ++k) {
    const int v = tri(t0).v[k];
    if (distance(pts_[static_cast<std::size_t>(v)], p) <= scale) {
      out.vertex = v;
      out.duplicate = true;
      return out;
    }
  }

  ++stamp_;
  std::vector<int> cavity{t0};
  mark_[static_cast<std::size_t>(t0)] = stamp_;
  auto in_cavity = [&](int t) { return t >= 0 && mark_[static_cast<std::size_t>(t)] == stamp_; };

  // A point on an edge of t0 must take the neighbor along, or the new
  // triangle on that edge would be flat.
  for (int k = 0; k < 3; ++k) {
    const Tri& tr = tri(t0);
    const int n = tr.nb[k];
    if (n < 0 || in_cavity(n)) continue;
    const Point2 a = pts_[tr.v[(k + 1) % 3]];
    const Point2 b = pts_[tr.v[(k + 2) % 3]];
    const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    if (orient(a, b, p) <= 1e-12 * len2) {
      mark_[static_cast<std::size_t>(n)] = stamp_;
      cavity.push_back(n);
    }
  }

  for (std::size_t i = 0; i < cavity.size(); ++i) {
    const Tri tr = tri(cavity[i]);
    for (int k = 0; k < 3; ++k) {
      const int n = tr.nb[k];
      if (n < 0 || in_cavity(n)) continue;
      const Tri& nt = tri(n);
      if (incircle(pts_[nt.v[0]], pts_[nt.v[1]], pts_[nt.v[2]], p) > 0.0) {
        mark_[static_cast<std::size_t>(n)] = stamp_;
        cavity.push_back(n);
      }
    }
  }

  // Shrink the cavity until it is star-shaped from p.
  for (bool changed = true; changed;) {
    changed = false;
    for (int t : cavity) {
      if (t == t0 || !in_cavity(t)) continue;
      const Tri& tr = tri(t);
      for (int k = 0; k < 3; ++k) {
        if (in_cavity(tr.nb[k])) continue;
        if (orient(pts_[tr.v[(k + 1) % 3]], pts_[tr.v[(k + 2) % 3]], p) <= 0.0) {
          mark_[static_cast<std::size_t>(t)] = 0;
          changed = true;
          break;
        }
      }
    }
    if (changed) {
      // keep only the part still connected to t0
      std::vector<int> kept{t0};
      for (std::size_t i = 0; i < kept.size(); ++i) {
        for (int n : tri(kept[i]).nb) {
          if (in_cavity(n) && std::find(kept.begin(), kept.end(), n) == kept.end())
            kept.push_back(n);
        }
      }
      for (int t : cavity) {
        if (in_cavity(t) && std::find(kept.begin(), kept.end(), t) == kept.end())
          mark_[static_cast<std::size_t>(t)] = 0;
      }
      cavity = std::move(kept);
    }
  }

  const int pv = static_cast<int>(pts_.size());
  pts_.push_back(p);
  vert_tri_.push_back(-1);

  struct Edge {
    int a, b, outer;
  };
  std::vector<Edge> boundary;
  for (int t : cavity) {
    const Tri& tr = tri(t);
    for (int k = 0; k < 3; ++k) {
      const int a = tr.v[(k + 1) % 3];
      const int b = tr.v[(k + 2) % 3];
      out.removed_edges.emplace_back(a, b);
      if (!in_cavity(tr.nb[k])) boundary.push_back({a, b, tr.nb[k]});
    }
  }
  for (int t : cavity) {
    tris_[static_cast<std::size_t>(t)].alive = false;
    mark_[static_cast<std::size_t>(t)] = 0;
  }
  for (auto it = cavity.rbegin(); it != cavity.rend(); ++it) free_.push_back(*it);

  std::unordered_map<int, std::pair<int, int>> pending;  // shared vertex -> (tri, slot)
  pending.reserve(boundary.size() * 2);
  auto link = [&](int key, int t, int slot) {
    auto it = pending.find(key);
    if (it == pending.end()) {
      pending.emplace(key, std::make_pair(t, slot));
      return;
    }
    tris_[static_cast<std::size_t>(t)].nb[slot] = it->second.first;
    tris_[static_cast<std::size_t>(it->second.first)].nb[it->second.second] = t;
    pending.erase(it);
  };

  for (const Edge& e : boundary) {
    const int t = new_tri();
    Tri& nt = tris_[static_cast<std::size_t>(t)];
    nt.v = {e.a, e.b, pv};
    nt.nb = {-1, -1, e.outer};
    if (e.outer >= 0) {
      Tri& o = tris_[static_cast<std::size_t>(e.outer)];
      for (int k = 0; k < 3; ++k) {
        if (o.v[(k + 1) % 3] == e.b && o.v[(k + 2) % 3] == e.a) o.nb[k] = t;
      }
    }
    vert_tri_[static_cast<std::size_t>(e.a)] = t;
    vert_tri_[static_cast<std::size_t>(e.b)] = t;
    vert_tri_[static_cast<std::size_t>(pv)] = t;
    out.created.push_back(t);
    link(e.b, t, 0);  // edge b-p
    link(e.a, t, 1);  // edge p-a
  }
  if (!pending.empty()) throw MeshFailure("cavity boundary is not a closed loop");
  last_ = out.created.empty() ? last_ : out.created.back();
  out.vertex = pv;
  return out;
}

}  // namespace emsim::mesh::detail
