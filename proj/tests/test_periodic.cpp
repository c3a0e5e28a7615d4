#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "dilaflow/builders.hpp"
#include "dilaflow/errors.hpp"
#include "dilaflow/periodic.hpp"

using namespace dilaflow;

namespace {

// Crossing list of a corner ray truncated at a start-chart length.
std::vector<EdgeRef> ray_steps(const Surface& s, Corner c, double theta, double bound) {
  TraceConfig tc;
  tc.detect_cycles = false;
  tc.max_path_length = bound;
  tc.max_crossings = 100000;
  const TraceResult r = trace_from_corner(s, c, Direction(theta), tc);
  std::vector<EdgeRef> out;
  for (const auto& rec : r.crossings) out.push_back(signature_step(rec));
  return out;
}

bool prefix_related(const std::vector<EdgeRef>& a, const std::vector<EdgeRef>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  return std::equal(a.begin(), a.begin() + static_cast<long>(n), b.begin());
}

struct Found {
  Corner corner;
  double theta;
  double length;
};

// Independent oracle: sweep each corner's sector with rays, bisect every
// combinatorial change that is not a mere truncation, and keep the limits
// that end on a singularity within the bound. Valid on convex polygons.
std::vector<Found> swept_connections(const Surface& s, double bound, int rays) {
  std::vector<Found> out;
  TraceConfig tc;
  tc.detect_cycles = false;
  tc.max_path_length = bound * (1 + 1e-9);
  auto keep = [&](Corner c, double theta) {
    const TraceResult r = trace_from_corner(s, c, Direction(theta), tc);
    if (r.outcome.kind == OutcomeKind::HitSingularity && r.path_length <= bound * (1 + 1e-9))
      out.push_back({c, normalize_angle(theta), r.path_length});
  };
  for (const Singularity& sing : s.singularities()) {
    for (const Corner& c : sing.corners) {
      const double base = s.corner_base_angle(c), span = s.corner_angle(c);
      keep(c, base);
      double prev_t = base + 0.5 * span / rays;
      auto prev = ray_steps(s, c, prev_t, bound);
      for (int j = 1; j < rays; ++j) {
        const double t = base + (j + 0.5) * span / rays;
        auto cur = ray_steps(s, c, t, bound);
        if (!prefix_related(prev, cur)) {
          double a = prev_t, b = t;
          auto sa = prev;
          for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (a + b);
            auto sm = ray_steps(s, c, m, bound);
            if (!prefix_related(sa, sm)) {
              b = m;
            } else {
              a = m;
              sa = std::move(sm);
            }
          }
          keep(c, 0.5 * (a + b));
        }
        prev_t = t;
        prev = std::move(cur);
      }
    }
  }
  return out;
}

bool listed(const std::vector<SaddleConnection>& scs, const Found& f) {
  return std::any_of(scs.begin(), scs.end(), [&](const SaddleConnection& sc) {
    return sc.start_corner == f.corner && std::abs(angle_difference(sc.direction.theta(), f.theta)) < 1e-7 &&
           std::abs(sc.chart_length - f.length) < 1e-7;
  });
}

}  // namespace

TEST_CASE("dilation cylinder has one radial geodesic per direction in its sector") {
  const double alpha = kPi / 3;
  const Surface c = build_dilation_cylinder(0.5, alpha);
  const auto gs = closed_geodesics_in_direction(c, Direction(kPi / 6));
  REQUIRE(gs.size() == 1);
  CHECK(gs[0].holonomy == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gs[0].is_hyperbolic);
  // Oracle: the ray at angle pi/6 meets the outer chord [1, e^{i alpha}] at
  // its midpoint by symmetry.
  CHECK(gs[0].base.coord == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(verify_closed_geodesic(c, gs[0]));

  // The opposite direction is the same ray family traversed toward the rim.
  const auto back = closed_geodesics_in_direction(c, Direction(kPi / 6 + kPi));
  REQUIRE(back.size() == 1);
  CHECK(back[0].holonomy == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(closed_geodesics_in_direction(c, Direction(kPi / 2)).empty());
  CHECK(closed_geodesics_in_direction(c, Direction(alpha + 1e-6)).empty());
  CHECK(closed_geodesics_in_direction(c, Direction(-1e-6)).empty());

  for (int k = 0; k < 20; ++k) {
    const double beta = 0.01 + (alpha - 0.02) * (k + 0.5) / 20;
    const auto g = closed_geodesics_in_direction(c, Direction(beta));
    REQUIRE(g.size() == 1);
    CHECK(std::abs(g[0].holonomy - 0.5) < 1e-9);
    // The fixed ray at angle beta meets the outer chord where
    // arg(1 + s (e^{i alpha} - 1)) = beta.
    const double s = std::sin(beta) / (std::sin(beta) + std::sin(alpha - beta));
    const EdgeRef outer{0, 0};
    const double coord = g[0].base.edge == outer ? g[0].base.coord : 1 - g[0].base.coord;
    CHECK(coord == doctest::Approx(s).epsilon(1e-8));
  }
}

TEST_CASE("hyperbolic geodesics contract and reverse to the inverse ratio") {
  for (const Surface& s : {build_dilation_cylinder(0.5, kPi / 3), build_two_chamber()}) {
    for (double theta : {0.3, 0.7, 2.0, 3.7, 5.1}) {
      for (const auto& g : closed_geodesics_in_direction(s, Direction(theta))) {
        CHECK(g.holonomy < 1 - 1e-9);
        CHECK(verify_closed_geodesic(s, g));
        const auto r = reverse_geodesic(s, g);
        REQUIRE(r);
        CHECK(r->holonomy * g.holonomy == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(r->signature.size() == g.signature.size());
      }
    }
  }
}

TEST_CASE("geodesics in one direction are distinct") {
  const Surface s = build_two_chamber();
  int total = 0;
  for (int k = 0; k < 16; ++k) {
    const auto gs = closed_geodesics_in_direction(s, Direction((k + 0.5) * kTwoPi / 16));
    total += static_cast<int>(gs.size());
    for (std::size_t i = 0; i < gs.size(); ++i)
      for (std::size_t j = i + 1; j < gs.size(); ++j) CHECK(geodesic_key(gs[i]) != geodesic_key(gs[j]));
  }
  CHECK(total > 0);
}

TEST_CASE("torus has flat families only") {
  const Surface t = build_torus();
  for (double theta : {0.3, std::atan2(1.0, 2.0), kPi / 4, 2.5}) {
    const auto search = find_closed_geodesics(t, Direction(theta));
    CHECK(search.hyperbolic.empty());
  }
  CHECK_FALSE(find_closed_geodesics(t, Direction(std::atan2(1.0, 2.0))).flat.empty());
}

TEST_CASE("cylinder extension recovers the sector angle") {
  for (double alpha : {kPi / 3, 3 * kPi / 4}) {
    const Surface c = build_dilation_cylinder(0.5, alpha);
    const auto gs = closed_geodesics_in_direction(c, Direction(alpha / 2));
    REQUIRE(gs.size() == 1);
    const Cylinder cyl = extend_to_cylinder(c, gs[0]);
    CHECK(std::abs(cyl.angular_extent - alpha) < 1e-6);
    CHECK(std::abs(cyl.lo) < 1e-6);
    CHECK(std::abs(cyl.hi - alpha) < 1e-6);
    CHECK(cyl.contains(alpha / 2));
    CHECK_FALSE(cyl.contains(alpha + 1e-6));
    // The family degenerates onto the two radial boundary edges.
    CHECK(cyl.boundary.size() >= 2);
    for (const auto& sc : cyl.boundary) {
      CHECK(sc.chart_length == doctest::Approx(0.5).epsilon(1e-6));
      const double t = std::fmod(sc.direction.theta(), kPi);
      CHECK((std::abs(t) < 1e-6 || std::abs(t - alpha) < 1e-6 || std::abs(t - kPi) < 1e-6));
    }
    for (const auto& g : cyl.samples) CHECK(g.holonomy == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("wide cylinder exceeds a half turn") {
  const double alpha = kPi + 0.1;
  const Surface c = build_dilation_cylinder(0.5, alpha);
  const auto gs = closed_geodesics_in_direction(c, Direction(alpha / 2));
  REQUIRE(gs.size() == 1);
  const Cylinder cyl = extend_to_cylinder(c, gs[0]);
  CHECK(cyl.angular_extent >= kPi - 1e-6);
  CHECK(std::abs(cyl.angular_extent - alpha) < 1e-6);
}

TEST_CASE("extension rejects flat geodesics") {
  ClosedGeodesic g;
  g.signature = {{0, 0}};
  g.holonomy = 1;
  CHECK_THROWS_AS(extend_to_cylinder(build_torus(), g), Error);
}

TEST_CASE("veech detector verdicts") {
  CHECK(std::holds_alternative<NoLargeCylinderFound>(veech_criterion(build_torus(), 16)));
  {
    const auto v = veech_criterion(build_dilation_cylinder(0.5, kPi / 3));
    REQUIRE(std::holds_alternative<NoLargeCylinderFound>(v));
    CHECK(std::get<NoLargeCylinderFound>(v).largest_extent == doctest::Approx(kPi / 3).epsilon(1e-6));
  }
  CHECK(std::holds_alternative<NoLargeCylinderFound>(veech_criterion(build_dilation_cylinder(0.5, 3 * kPi / 4))));
  const auto v = veech_criterion(build_dilation_cylinder(0.5, kPi + 0.1));
  REQUIRE(std::holds_alternative<FoundCylinder>(v));
  CHECK(std::get<FoundCylinder>(v).cylinder.angular_extent >= kPi - 1e-6);
}

TEST_CASE("torus saddle connections are the primitive lattice vectors") {
  const Surface t = build_torus();
  const auto scs = enumerate_saddle_connections(t, 1.5);
  // Oracle: primitive integer vectors of length at most 1.5.
  std::vector<std::pair<double, double>> lattice;
  for (int p = -2; p <= 2; ++p)
    for (int q = -2; q <= 2; ++q)
      if (std::gcd(p, q) == 1 && std::hypot(p, q) <= 1.5) lattice.emplace_back(angle_of({double(p), double(q)}), std::hypot(p, q));
  std::sort(lattice.begin(), lattice.end());
  REQUIRE(lattice.size() == 8);
  REQUIRE(scs.size() == lattice.size());
  for (std::size_t i = 0; i < scs.size(); ++i) {
    CHECK(scs[i].direction.theta() == doctest::Approx(lattice[i].first).epsilon(1e-12));
    CHECK(scs[i].chart_length == doctest::Approx(lattice[i].second).epsilon(1e-12));
    CHECK(scs[i].start_singularity == 0);
    CHECK(scs[i].end_singularity == 0);
  }
  CHECK(enumerate_saddle_connections(t, 0.0).empty());
  CHECK(enumerate_saddle_connections(build_two_chamber(), 0.0).empty());
}

TEST_CASE("saddle connection enumeration matches a ray sweep") {
  for (const auto& [s, bound] : {std::pair{build_two_chamber(), 2.5}, std::pair{build_torus(), 2.3}}) {
    const auto scs = enumerate_saddle_connections(s, bound);
    const auto swept = swept_connections(s, bound, 2048);
    CHECK(swept.size() > 0);
    for (const Found& f : swept) {
      INFO("corner " << f.corner.polygon << ":" << f.corner.vertex << " theta " << f.theta << " length " << f.length);
      CHECK(listed(scs, f));
    }
    for (const auto& sc : scs) {
      CHECK(sc.chart_length <= bound * (1 + 1e-9));
      CHECK(verify_saddle_connection(s, sc.start_corner, sc.direction, sc.chart_length));
    }
    for (std::size_t i = 1; i < scs.size(); ++i)
      CHECK((scs[i - 1].direction.theta() < scs[i].direction.theta() ||
             (scs[i - 1].direction.theta() == scs[i].direction.theta() &&
              scs[i - 1].chart_length <= scs[i].chart_length)));
  }
}

TEST_CASE("two chamber enumeration contains the separating connection") {
  const Surface s = build_two_chamber();
  const EdgeRef sep = two_chamber_separator();
  const Polygon& p = s.polygon(sep.polygon);
  const double length = norm(p.edge_vector(sep.edge));
  const double theta = angle_of(p.edge_vector(sep.edge));
  const auto scs = enumerate_saddle_connections(s, length * 1.01);
  const bool found = std::any_of(scs.begin(), scs.end(), [&](const SaddleConnection& sc) {
    return sc.start_corner == Corner{sep.polygon, sep.edge} && sc.signature.empty() &&
           std::abs(angle_difference(sc.direction.theta(), theta)) < 1e-12 &&
           std::abs(sc.chart_length - length) < 1e-12;
  });
  CHECK(found);
}
