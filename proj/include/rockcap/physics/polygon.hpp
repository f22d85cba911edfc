#pragma once

#include <span>
#include <vector>

#include "rockcap/core/vec2.hpp"

namespace rockcap::physics {

using Polygon = std::vector<Vec2>;

// Signed area; positive for counter-clockwise winding.
double signed_area(std::span<const Vec2> poly);
Vec2 centroid(std::span<const Vec2> poly);
// Second moment of area about the centroid (m^4 per unit out-of-plane depth).
double polar_moment_about_centroid(std::span<const Vec2> poly);
bool is_convex(std::span<const Vec2> poly);
// No two non-adjacent edges intersect.
bool is_simple(std::span<const Vec2> poly);
double perimeter(std::span<const Vec2> poly);
// Largest vertex distance from `center`.
double max_radius(std::span<const Vec2> poly, Vec2 center);

Polygon transformed(std::span<const Vec2> local, const Pose2& pose);

// Signed distance of `p` to a convex counter-clockwise polygon: negative inside.
// `face` receives the index of the edge attaining the maximum face distance.
double convex_signed_distance(std::span<const Vec2> poly, Vec2 p, int* face = nullptr);
Vec2 edge_normal(std::span<const Vec2> poly, int edge);

// Lowest and highest z of the polygon boundary along the vertical line at x.
// Returns false if the line misses the polygon.
bool vertical_extent(std::span<const Vec2> poly, double x, double& z_low, double& z_high);

struct ContactPoint {
  Vec2 point;          // on the surface of body B
  double separation;   // negative when penetrating
};

struct Manifold {
  Vec2 normal;  // unit, points from A towards B
  int count = 0;
  ContactPoint points[2];
};

// Separating-axis test with reference-face clipping for two convex CCW polygons.
// Reports points whose separation is below `margin`.
Manifold collide_convex(std::span<const Vec2> a, std::span<const Vec2> b, double margin);

}  // namespace rockcap::physics
