#pragma once

#include <cmath>

namespace rockcap {

// Point or direction in the manipulator plane. `z` is up, `x` points to the rear of the machine.
struct Vec2 {
  double x = 0.0;
  double z = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double z_) : x(x_), z(z_) {}

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, z + o.z}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, z - o.z}; }
  constexpr Vec2 operator-() const { return {-x, -z}; }
  constexpr Vec2 operator*(double s) const { return {x * s, z * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, z / s}; }
  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; z += o.z; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; z -= o.z; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; z *= s; return *this; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, z); }
  constexpr double squared_norm() const { return x * x + z * z; }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.z * b.z; }
// Scalar planar cross product a.x*b.z - a.z*b.x.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.z - a.z * b.x; }
// omega x r for an out-of-plane angular rate.
constexpr Vec2 cross(double w, const Vec2& r) { return {-w * r.z, w * r.x}; }
// Counter-clockwise perpendicular.
constexpr Vec2 perp(const Vec2& v) { return {-v.z, v.x}; }

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.z, s * v.x + c * v.z};
}

inline Vec2 normalized(const Vec2& v) {
  const double n = v.norm();
  return n > 0.0 ? v / n : Vec2{};
}

inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.z); }

// Rigid transform: rotate by `angle`, then translate by `origin`.
struct Pose2 {
  Vec2 origin;
  double angle = 0.0;

  Vec2 apply(const Vec2& local) const { return origin + rotate(local, angle); }
  Vec2 apply_inverse(const Vec2& world) const { return rotate(world - origin, -angle); }
};

}  // namespace rockcap
