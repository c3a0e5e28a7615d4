#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dilaflow/builders.hpp"
#include "dilaflow/errors.hpp"
#include "dilaflow/horizon.hpp"

using namespace dilaflow;

namespace {

// Components of the polygon adjacency graph, counted without the library.
int components_by_pairing(const Surface& s) {
  std::vector<int> parent(static_cast<std::size_t>(s.num_polygons()));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
    return x;
  };
  for (const auto& [e, f] : s.spec().pairings) parent[static_cast<std::size_t>(find(e.polygon))] = find(f.polygon);
  int n = 0;
  for (int p = 0; p < s.num_polygons(); ++p) n += find(p) == p;
  return n;
}

std::vector<double> uniform_grid(int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back((i + 0.5) * kTwoPi / n);
  return g;
}

}  // namespace

TEST_CASE("cutting the torus along a closed saddle connection gives an annulus") {
  const Surface t = build_torus();
  const Surface cut = cut_along(t, edge_connection(t, {0, 0}));
  CHECK(cut.num_components() == 1);
  CHECK(components_by_pairing(cut) == 1);
  CHECK(cut.genus() == 0);
  CHECK(cut.boundary_components().size() == 2);
  CHECK(cut.euler_characteristic() == t.euler_characteristic());
  for (const auto& comp : cut.boundary_components()) CHECK(comp.size() == 1);
  const auto d = is_disconnecting(t, edge_connection(t, {0, 0}));
  CHECK_FALSE(d.disconnecting);
  CHECK(d.components == 1);

  // The diagonal runs through the interior of the square and splits it.
  const auto scs = enumerate_saddle_connections(t, 1.5);
  for (const auto& sc : scs) {
    if (std::abs(sc.chart_length - std::sqrt(2.0)) > 1e-9) continue;
    const Surface diag = cut_along(t, sc);
    CHECK(diag.num_polygons() == 2);
    CHECK(diag.num_components() == 1);
    CHECK(diag.genus() == 0);
    CHECK(diag.boundary_components().size() == 2);
    CHECK(components_by_pairing(diag) == 1);
  }
}

TEST_CASE("the two chamber separator disconnects") {
  const Surface s = build_two_chamber();
  const SaddleConnection sep = edge_connection(s, two_chamber_separator());
  const auto d = is_disconnecting(s, sep);
  CHECK(d.disconnecting);
  CHECK(d.components == 2);
  const Surface cut = cut_along(s, sep);
  CHECK(components_by_pairing(cut) == 2);
  CHECK(cut.euler_characteristic() == s.euler_characteristic());
  CHECK(cut.boundary_components().size() == 2);
  for (const auto& sing : cut.singularities()) CHECK(sing.on_boundary);
}

TEST_CASE("connections inside one chamber do not disconnect") {
  const Surface s = build_two_chamber();
  const auto d = is_disconnecting(s, edge_connection(s, {0, 0}));
  CHECK_FALSE(d.disconnecting);
  CHECK(d.components == 1);

  // A connection crossing the interior of the first chamber's polygon.
  int checked = 0;
  for (const auto& sc : enumerate_saddle_connections(s, 2.5)) {
    if (sc.start_corner.polygon != 0 || sc.end_corner.polygon != 0 || sc.signature.size() > 2) continue;
    const bool inside = std::all_of(sc.signature.begin(), sc.signature.end(),
                                    [](EdgeRef e) { return e.polygon == 0 && e.edge != 4; });
    const Vec2 sep = s.polygon(0).edge_vector(4);
    const bool on_separator = std::abs(cross(sep, sc.direction.unit())) < 1e-9 && std::abs(sc.chart_length - norm(sep)) < 1e-9;
    if (!inside || on_separator) continue;
    const Surface cut = cut_along(s, sc);
    CHECK(cut.num_components() == 1);
    CHECK(components_by_pairing(cut) == 1);
    checked += cut.num_polygons() > s.num_polygons();
  }
  CHECK(checked > 0);
}

TEST_CASE("cutting rejects what is not a saddle connection") {
  const Surface t = build_torus();
  SaddleConnection bogus = edge_connection(t, {0, 0});
  bogus.chart_length = 0.5;
  CHECK_THROWS_AS(cut_along(t, bogus), Error);
  CHECK_THROWS_AS(edge_connection(build_dilation_cylinder(0.5, kPi + 0.1), {0, 1}), Error);
}

TEST_CASE("no trajectory crosses the separator twice") {
  const Surface s = build_two_chamber();
  const SaddleConnection sep = edge_connection(s, two_chamber_separator());
  HorizonConfig cfg;
  cfg.trace.max_crossings = 2000;
  const auto est = empirical_crossing_bound(s, sep, uniform_grid(60), cfg);
  CHECK(est.global_max == 1);
  CHECK(est.traces > 500);
  CHECK(est.cycles_crossing == 0);
  REQUIRE(est.certified);
  CHECK(*est.certified == 1);
  CHECK(est.openness_passed);
  CHECK_FALSE(est.openness.empty());
  for (const auto& o : est.openness) {
    CHECK(o.plus);
    CHECK(o.minus);
  }
}

TEST_CASE("torus crossing counts grow with the budget") {
  const Surface t = build_torus();
  const SaddleConnection sc = edge_connection(t, {0, 0});
  // Slope 1/(50 + 1/(1 + ...)): long runs between returns to the marked point.
  const double theta = std::atan(1 / (50 + (std::sqrt(5.0) - 1) / 2));
  HorizonConfig small, large;
  small.trace.max_crossings = 500;
  large.trace.max_crossings = 2000;
  const int k_small = empirical_crossing_bound(t, sc, {theta}, small).global_max;
  const int k_large = empirical_crossing_bound(t, sc, {theta}, large).global_max;
  CHECK(k_small > 0);
  // Oracle: the line crosses the horizontal edge once per unit rise, so the
  // count scales with the number of crossings allowed.
  CHECK(k_large > 3 * k_small);
  CHECK_FALSE(is_disconnecting(t, sc).disconnecting);
  CHECK_THROWS_AS(max_crossing_pencil(t, sc, theta - 0.01, theta + 0.01, small), Error);
}

TEST_CASE("the cylinder boundary is never reached inside the sector") {
  const Surface c = build_dilation_cylinder(0.5, kPi / 3);
  const SaddleConnection bottom = edge_connection(c, {0, 3});
  HorizonConfig cfg;
  cfg.both_orientations = false;
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(0.02 + i * (kPi / 3 - 0.04) / 19);
  const auto est = empirical_crossing_bound(c, bottom, grid, cfg);
  CHECK(est.global_max == 0);
  const Pencil p = max_crossing_pencil(c, bottom, 0.2, 0.5, cfg);
  CHECK(p.k == 0);
  CHECK_FALSE(p.note.empty());
  for (int n : p.witness_crossings) CHECK(n == 0);
}

TEST_CASE("pencil from the last crossing avoids the separator") {
  const Surface s = build_two_chamber();
  const SaddleConnection sep = edge_connection(s, two_chamber_separator());
  HorizonConfig cfg;
  cfg.trace.max_crossings = 2000;
  for (double lo : {0.4, 2.0, 4.5}) {
    const Pencil p = max_crossing_pencil(s, sep, lo, lo + 0.3, cfg);
    CHECK(p.k == 1);
    CHECK(p.apex.edge);
    CHECK(p.lo >= lo);
    CHECK(p.hi <= lo + 0.3);
    CHECK(p.hi > p.lo);
    REQUIRE(!p.witnesses.empty());
    for (int n : p.witness_crossings) CHECK(n == 0);
    for (const auto& w : p.witnesses) {
      CHECK(w.direction.theta() > p.lo);
      CHECK(w.direction.theta() < p.hi);
    }
  }
}
