#include "dilaflow/builders.hpp"

#include <cmath>

#include "dilaflow/errors.hpp"

namespace dilaflow {

Surface build_torus() {
  SurfaceSpec spec;
  spec.polygons.push_back({0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
  spec.pairings = {{{0, 0}, {0, 2}}, {{0, 1}, {0, 3}}};
  spec.marked_points = {{0, 0}};
  return Surface::validate(std::move(spec));
}

Surface build_dilation_cylinder(double rho, double alpha) {
  if (!(rho > 0 && rho < 1)) throw Error(ErrorCode::ParamOutOfRange, "rho must lie in (0, 1)");
  if (!(alpha > 0 && alpha < kTwoPi)) throw Error(ErrorCode::ParamOutOfRange, "alpha must lie in (0, 2pi)");
  const int wedges = alpha < kPi ? 1 : static_cast<int>(std::ceil(alpha / (kPi / 2)));
  auto ray = [](double beta, double r) { return Vec2{r * std::cos(beta), r * std::sin(beta)}; };

  SurfaceSpec spec;
  for (int j = 0; j < wedges; ++j) {
    const double b0 = alpha * j / wedges;
    const double b1 = alpha * (j + 1) / wedges;
    // Edge 0 is the outer chord, 2 the inner chord, 1 and 3 are radial.
    spec.polygons.push_back({j, {ray(b0, 1), ray(b1, 1), ray(b1, rho), ray(b0, rho)}});
    spec.pairings.push_back({{j, 0}, {j, 2}});
    if (j + 1 < wedges) spec.pairings.push_back({{j, 1}, {j + 1, 3}});
  }
  spec.marked_points = {{0, 0}, {wedges - 1, 1}};
  return Surface::validate(std::move(spec));
}

namespace {

// Pentagon with side pairs (0,2) and (1,3) whose fifth edge is (1,-1).
Polygon chamber(int id, double ratio_a, double ratio_b, bool negate) {
  const double w = 1.0 / (ratio_a - 1.0);
  const double h = 1.0 / (1.0 - ratio_b);
  std::vector<Vec2> v = {{0, 0}, {w, 0}, {w, h}, {w - ratio_a * w, h}, {w - ratio_a * w, h - ratio_b * h}};
  if (negate)
    for (auto& p : v) p = Vec2{0, 0} - p;  // no negative zeros
  return {id, v};
}

}  // namespace

Surface build_two_chamber(const TwoChamberParams& params) {
  for (double r : {params.chamber1_ratio_a, params.chamber2_ratio_a})
    if (!(r > 1 && std::isfinite(r))) throw Error(ErrorCode::ParamOutOfRange, "first ratio of each chamber must exceed 1");
  for (double r : {params.chamber1_ratio_b, params.chamber2_ratio_b})
    if (!(r > 0 && r < 1)) throw Error(ErrorCode::ParamOutOfRange, "second ratio of each chamber must lie in (0, 1)");
  SurfaceSpec spec;
  spec.polygons.push_back(chamber(0, params.chamber1_ratio_a, params.chamber1_ratio_b, false));
  spec.polygons.push_back(chamber(1, params.chamber2_ratio_a, params.chamber2_ratio_b, true));
  spec.pairings = {{{0, 0}, {0, 2}}, {{0, 1}, {0, 3}}, {{1, 0}, {1, 2}}, {{1, 1}, {1, 3}}, {{0, 4}, {1, 4}}};
  return Surface::validate(std::move(spec));
}

EdgeRef two_chamber_separator() { return {0, 4}; }

}  // namespace dilaflow
