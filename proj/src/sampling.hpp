#pragma once

#include <algorithm>
#include <random>

#include "dilaflow/surface.hpp"

namespace dilaflow::detail {

/// Uniform point of the polygon by rejection from its bounding box.
inline Vec2 random_interior_point(const Polygon& poly, std::mt19937_64& rng) {
  Vec2 lo = poly.vertex(0), hi = lo;
  for (const Vec2& v : poly.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
  }
  std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
  for (;;) {
    const Vec2 p{ux(rng), uy(rng)};
    if (poly.contains(p)) return p;
  }
}

/// Seed for work item k of a run, independent of scheduling order.
inline std::uint64_t item_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace dilaflow::detail
