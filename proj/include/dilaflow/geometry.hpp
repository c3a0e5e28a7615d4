#pragma once

// Planar primitives shared by every module: points, affine maps z -> a z + b
// with a > 0, and direction angles on the circle.

#include <cmath>
#include <numbers>

namespace dilaflow {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Global geometric tolerance, relative to polygon diameter.
inline constexpr double kEpsGeo = 1e-9;

struct Vec2 {
  double x{0};
  double y{0};

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Normalizes an angle into [0, 2pi).
inline double normalize_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

/// Signed smallest difference a - b, in (-pi, pi].
inline double angle_difference(double a, double b) {
  double d = normalize_angle(a - b);
  return d > kPi ? d - kTwoPi : d;
}

inline double angle_of(Vec2 v) { return normalize_angle(std::atan2(v.y, v.x)); }

/// Counterclockwise angle swept from a to b, in [0, 2pi).
inline double ccw_angle(Vec2 a, Vec2 b) { return normalize_angle(std::atan2(cross(a, b), dot(a, b))); }

/// A direction of the flow. Directions are chart independent because every
/// transition map has a positive real linear part.
class Direction {
 public:
  Direction() = default;
  explicit Direction(double theta) : theta_(normalize_angle(theta)) {
    unit_ = {std::cos(theta_), std::sin(theta_)};
  }

  double theta() const { return theta_; }
  Vec2 unit() const { return unit_; }
  Direction reversed() const { return Direction(theta_ + kPi); }

 private:
  double theta_{0};
  Vec2 unit_{1, 0};
};

/// z -> a z + b with a > 0.
struct AffineMap {
  double a{1};
  Vec2 b{};

  Vec2 operator()(Vec2 z) const { return a * z + b; }

  /// (this o other)(z) = this(other(z)).
  AffineMap after(const AffineMap& other) const { return {a * other.a, a * other.b + b}; }
  AffineMap inverse() const { return {1.0 / a, -b / a}; }

  static AffineMap identity() { return {}; }
};

}  // namespace dilaflow
