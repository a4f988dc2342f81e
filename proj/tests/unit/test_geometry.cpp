#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "emsim/geometry.hpp"

using namespace emsim;
using namespace emsim::geometry;

TEST_SUITE("geometry") {

TEST_CASE("centroid") {
  CHECK(centroid({{0, 0}}) == Point2{0, 0});
  const Point2 c = centroid({{0, 0}, {0.02, 0}, {0, 0.02}});
  CHECK(c.x == doctest::Approx(0.02 / 3).epsilon(1e-12));
  CHECK(c.y == doctest::Approx(0.02 / 3).epsilon(1e-12));
  const Point2 s = centroid({{-0.7, 0}, {0.7, 0}});
  CHECK(s.x == 0.0);
  CHECK_THROWS_AS(centroid({}), EmptyLayout);
}

TEST_CASE("boundary") {
  ConductorLayout one{{{0, 0}}};
  one.boundary_margin_m = 0.015;
  CHECK(boundary(one).radius_m == doctest::Approx(0.015));

  ConductorLayout three{{{0, 0}, {0.02, 0}, {0, 0.02}}};
  three.boundary_margin_m = 0.015;
  // independent: farthest point (0.02, 0) from (0.02/3, 0.02/3)
  const double expect = std::hypot(0.02 - 0.02 / 3, 0.02 / 3) + 0.015;
  CHECK(boundary(three).radius_m == doctest::Approx(expect).epsilon(1e-12));
  CHECK(boundary(three).radius_m == doctest::Approx(0.0299071).epsilon(1e-6));

  ConductorLayout pair{{{-0.01, 0}, {0.01, 0}}};
  pair.boundary_margin_m = 0.015;
  CHECK(boundary(pair).center == Point2{0, 0});
  CHECK(boundary(pair).radius_m == doctest::Approx(0.025));
  CHECK_THROWS_AS(boundary(ConductorLayout{}), EmptyLayout);
}

TEST_CASE("overlap") {
  ConductorLayout l{{{0, 0}, {0.009, 0}}};
  CHECK(check_overlap(l) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
  l.centers[1] = {0.010, 0};  // tangent is rejected
  CHECK(check_overlap(l).size() == 1);
  l.centers[1] = {0.0101, 0};
  CHECK(check_overlap(l).empty());

  ConductorLayout ring;
  for (int k = 0; k < 12; ++k) {
    const double t = 2 * std::numbers::pi * k / 12;
    ring.centers.push_back({0.03 * std::cos(t), 0.03 * std::sin(t)});
  }
  CHECK(check_overlap(ring).empty());
}

TEST_CASE("skin depth") {
  MaterialSpec cu;
  ExcitationSpec ex;
  const double d = skin_depth(cu, ex);
  CHECK(d == doctest::Approx(std::sqrt(2.0 / (2 * std::numbers::pi * 50 * 4e-7 * std::numbers::pi * 58.1e6))));
  CHECK(d == doctest::Approx(9.34e-3).epsilon(1e-3));
  MaterialSpec cu4 = cu;
  cu4.conductivity_S_per_m *= 4;
  CHECK(skin_depth(cu4, ex) == doctest::Approx(d / 2));
  ExcitationSpec ex4 = ex;
  ex4.frequency_Hz *= 4;
  CHECK(skin_depth(cu, ex4) == doctest::Approx(d / 2));
  MaterialSpec none = cu;
  none.conductivity_S_per_m = 0;
  CHECK_THROWS_AS(skin_depth(none, ex), NonConductive);
}

TEST_CASE("validation") {
  ConductorLayout bad{{{0, std::nan("")}}};
  CHECK_THROWS_AS(validate(bad), GeometryError);
  ConductorLayout r0{{{0, 0}}};
  r0.radius_m = 0;
  CHECK_THROWS_AS(validate(r0), GeometryError);
  ExcitationSpec neg;
  neg.frequency_Hz = -1;
  CHECK_THROWS(validate(neg));
  ExcitationSpec dc;
  dc.frequency_Hz = 0;
  CHECK_NOTHROW(validate(dc));
}

TEST_CASE("translation and rotation properties") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int trial = 0; trial < 50; ++trial) {
    ConductorLayout l;
    const int n = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) l.centers.push_back({u(rng), u(rng)});
    const Point2 t{u(rng), u(rng)};
    ConductorLayout moved = l;
    for (auto& c : moved.centers) c = c + t;
    const auto b0 = boundary(l);
    const auto b1 = boundary(moved);
    CHECK(b1.center.x == doctest::Approx(b0.center.x + t.x).epsilon(1e-12));
    CHECK(b1.center.y == doctest::Approx(b0.center.y + t.y).epsilon(1e-12));
    CHECK(b1.radius_m == doctest::Approx(b0.radius_m).epsilon(1e-12));
    CHECK(b0.radius_m >= l.boundary_margin_m);

    // overlap report: symmetric in order, invariant under rotation
    ConductorLayout rev = l;
    std::reverse(rev.centers.begin(), rev.centers.end());
    ConductorLayout rot = l;
    const double a = u(rng) * 40;
    for (auto& c : rot.centers) c = {std::cos(a) * c.x - std::sin(a) * c.y, std::sin(a) * c.x + std::cos(a) * c.y};
    auto pairs = check_overlap(l);
    auto rpairs = check_overlap(rev);
    for (auto& [i, j] : rpairs) {
      const std::size_t a2 = static_cast<std::size_t>(n) - 1 - j, b2 = static_cast<std::size_t>(n) - 1 - i;
      i = a2;
      j = b2;
    }
    std::sort(rpairs.begin(), rpairs.end());
    CHECK(pairs == rpairs);
    CHECK(check_overlap(rot).size() == pairs.size());
  }
}

}
