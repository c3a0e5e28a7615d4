#include <doctest.h>

#include <cmath>

#include "dilaflow/builders.hpp"
#include "dilaflow/errors.hpp"
#include "dilaflow/surface.hpp"

using namespace dilaflow;

namespace {

ErrorCode code_of(const SurfaceSpec& spec, ValidateOptions options = {}) {
  try {
    Surface::validate(spec, options);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("validation unexpectedly succeeded");
  return ErrorCode::Malformed;
}

SurfaceSpec square_spec() {
  SurfaceSpec spec;
  spec.polygons.push_back({0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
  spec.pairings = {{{0, 0}, {0, 2}}, {{0, 1}, {0, 3}}};
  return spec;
}

int index_defect(const Surface& s) {
  int total = 0;
  for (const auto& sing : s.singularities())
    if (sing.index) total += *sing.index - 1;
  return total;
}

}  // namespace

TEST_CASE("torus has one marked point and genus one") {
  const Surface t = build_torus();
  CHECK(t.genus() == 1);
  CHECK(t.is_closed());
  REQUIRE(t.singularities().size() == 1);
  const auto& m = t.singularities()[0];
  CHECK(m.kind == PointKind::MarkedPoint);
  CHECK(m.index == 1);
  CHECK(m.dilation_ratio == doctest::Approx(1.0));
  CHECK(m.cone_angle == doctest::Approx(kTwoPi));
  CHECK(m.corners.size() == 4);
}

TEST_CASE("an unmarked square is a torus without singularities") {
  const Surface t = Surface::validate(square_spec());
  CHECK(t.singularities().empty());
  CHECK(t.vertex_classes().size() == 1);
  CHECK(t.genus() == 1);
}

TEST_CASE("dilation cylinder pairing ratio and boundary") {
  const double rho = 0.5, alpha = kPi / 3;
  const Surface c = build_dilation_cylinder(rho, alpha);
  // Ratio by direct computation of the two chord lengths.
  const double inner = std::hypot(rho * std::cos(alpha) - rho, rho * std::sin(alpha));
  const double outer = std::hypot(std::cos(alpha) - 1, std::sin(alpha));
  REQUIRE(c.pairings().size() == 1);
  CHECK(c.pairings()[0].ratio == doctest::Approx(inner / outer).epsilon(1e-12));
  CHECK(c.pairings()[0].ratio == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.boundary_components().size() == 2);
  CHECK(c.singularities().size() == 2);
  for (const auto& s : c.singularities()) {
    CHECK(s.on_boundary);
    CHECK_FALSE(s.index.has_value());
  }
  CHECK(c.genus() == 0);
  CHECK(c.euler_characteristic() == 0);
}

TEST_CASE("radial segment of the dilation cylinder closes with holonomy rho") {
  const Surface c = build_dilation_cylinder(0.5, kPi / 3);
  const EdgeRef path[] = {{0, 0}};
  const AffineMap h = holonomy_of_path(c, path);
  CHECK(h.a == doctest::Approx(0.5));
  for (double beta : {0.1, 0.5, 1.0}) {
    const Vec2 out{std::cos(beta), std::sin(beta)};
    const Vec2 image = h(out);
    // The image lies on the same ray through the origin.
    CHECK(std::abs(cross(out, image)) < 1e-12);
    CHECK(norm(image) == doctest::Approx(0.5));
  }
}

TEST_CASE("wide dilation cylinder uses regular interior vertices") {
  const Surface c = build_dilation_cylinder(0.5, kPi + 0.1);
  CHECK(c.num_polygons() == 3);
  CHECK(c.singularities().size() == 2);
  int regular_interior = 0;
  for (const auto& vc : c.vertex_classes())
    if (!vc.on_boundary && vc.singularity < 0) {
      ++regular_interior;
      CHECK(vc.cone_angle == doctest::Approx(kTwoPi));
      CHECK(vc.dilation_ratio == doctest::Approx(1.0));
    }
  CHECK(regular_interior == 2);
  CHECK(c.genus() == 0);
}

TEST_CASE("two chamber surface is genus two with one cone point of angle 6pi") {
  const Surface s = build_two_chamber();
  CHECK(s.is_closed());
  CHECK(s.genus() == 2);
  REQUIRE(s.singularities().size() == 1);
  CHECK(s.singularities()[0].index == 3);
  CHECK(s.singularities()[0].cone_angle == doctest::Approx(6 * kPi));
  CHECK(index_defect(s) == 2 * s.genus() - 2);
}

TEST_CASE("structural invariants hold on every builder") {
  for (const Surface& s : {build_torus(), build_dilation_cylinder(0.5, kPi / 3), build_dilation_cylinder(0.3, 4.0),
                           build_two_chamber()}) {
    for (const AffineMap& h : contractible_loop_holonomies(s)) {
      CHECK(std::abs(h.a - 1) < 1e-9);
      CHECK(norm(h.b) < 1e-9);
    }
    for (const auto& pr : s.pairings()) {
      const AffineMap round = s.transition(pr.f).after(s.transition(pr.e));
      CHECK(std::abs(round.a - 1) < 1e-12);
      CHECK(norm(round.b) < 1e-12);
    }
    if (s.is_closed()) CHECK(index_defect(s) == 2 * s.genus() - 2);
  }
}

TEST_CASE("validation errors") {
  SUBCASE("scaled but not anti-parallel") {
    SurfaceSpec spec;
    spec.polygons.push_back({0, {{0, 0}, {1, 0}, {1, 1}, {0, 2}}});
    spec.pairings = {{{0, 0}, {0, 2}}, {{0, 1}, {0, 3}}};
    CHECK(code_of(spec) == ErrorCode::NonParallelEdges);
  }
  SUBCASE("parallel in the same direction") {
    SurfaceSpec spec;
    spec.polygons.push_back({0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
    spec.polygons.push_back({1, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
    spec.pairings = {{{0, 0}, {1, 0}}};
    CHECK(code_of(spec) == ErrorCode::NegativeRatio);
  }
  SUBCASE("two separate squares") {
    SurfaceSpec spec = square_spec();
    spec.polygons.push_back({1, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
    spec.pairings.push_back({{1, 0}, {1, 2}});
    spec.pairings.push_back({{1, 1}, {1, 3}});
    CHECK(code_of(spec) == ErrorCode::Disconnected);
    CHECK(Surface::validate(spec, {.auto_mark_boundary = true, .allow_disconnected = true}).num_components() == 2);
  }
  SUBCASE("bowtie") {
    SurfaceSpec spec;
    spec.polygons.push_back({0, {{0, 0}, {1, 1}, {1, 0}, {0, 1}}});
    CHECK(code_of(spec) == ErrorCode::SelfIntersectingPolygon);
  }
  SUBCASE("clockwise polygon") {
    SurfaceSpec spec;
    spec.polygons.push_back({0, {{0, 0}, {0, 1}, {1, 1}, {1, 0}}});
    CHECK(code_of(spec) == ErrorCode::SelfIntersectingPolygon);
  }
  SUBCASE("edge reused") {
    SurfaceSpec spec = square_spec();
    spec.pairings.push_back({{0, 0}, {0, 2}});
    CHECK(code_of(spec) == ErrorCode::Malformed);
  }
  SUBCASE("boundary without singularity") {
    SurfaceSpec spec;
    spec.polygons.push_back({0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
    spec.pairings = {{{0, 0}, {0, 2}}};
    CHECK(code_of(spec, {.auto_mark_boundary = false}) == ErrorCode::BareBoundaryComponent);
    const Surface s = Surface::validate(spec);
    CHECK(s.warnings().size() == 2);
    CHECK(s.singularities().size() == 2);
    CHECK(s.genus() == 0);
  }
}

TEST_CASE("holonomy along a broken chain is rejected") {
  const Surface s = build_two_chamber();
  const EdgeRef path[] = {{0, 0}, {0, 1}, {1, 0}};
  CHECK_THROWS_AS(holonomy_of_path(s, path), Error);
  const EdgeRef empty[1] = {};
  const AffineMap id = holonomy_of_path(s, std::span<const EdgeRef>(empty, 0));
  CHECK(id.a == 1.0);
  CHECK(norm(id.b) == 0.0);
}

TEST_CASE("contractible loops on the torus are trivial") {
  const Surface t = build_torus();
  // Around the vertex: right, up, left, down in the square.
  const EdgeRef loop[] = {{0, 0}, {0, 1}, {0, 2}, {0, 3}};
  const AffineMap h = holonomy_of_path(t, loop);
  CHECK(h.a == doctest::Approx(1.0));
  CHECK(norm(h.b) < 1e-12);
}
