#include "rockcap/physics/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rockcap::physics {

namespace {

std::size_t next(std::size_t i, std::size_t n) { return i + 1 == n ? 0 : i + 1; }

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

struct AxisResult {
  double separation = -std::numeric_limits<double>::infinity();
  int edge = -1;
};

// Largest separation of `b` from the faces of `a`.
AxisResult max_face_separation(std::span<const Vec2> a, std::span<const Vec2> b) {
  AxisResult best;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec2 n = edge_normal(a, static_cast<int>(i));
    double min_proj = std::numeric_limits<double>::infinity();
    for (const Vec2& v : b) min_proj = std::min(min_proj, dot(n, v - a[i]));
    if (min_proj > best.separation) {
      best.separation = min_proj;
      best.edge = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[next(i, poly.size())]);
  return 0.5 * a;
}

Vec2 centroid(std::span<const Vec2> poly) {
  double a = 0.0;
  Vec2 c;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[next(i, poly.size())];
    const double w = cross(p, q);
    a += w;
    c += (p + q) * w;
  }
  return c / (3.0 * a);
}

double polar_moment_about_centroid(std::span<const Vec2> poly) {
  const Vec2 c = centroid(poly);
  double j = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i] - c;
    const Vec2 q = poly[next(i, poly.size())] - c;
    const double w = cross(p, q);
    j += w * (dot(p, p) + dot(p, q) + dot(q, q));
  }
  return std::abs(j) / 12.0;
}

bool is_convex(std::span<const Vec2> poly) {
  if (poly.size() < 3) return false;
  int sign = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 e1 = poly[next(i, poly.size())] - poly[i];
    const Vec2 e2 = poly[next(next(i, poly.size()), poly.size())] - poly[next(i, poly.size())];
    const double c = cross(e1, e2);
    if (c == 0.0) continue;
    const int s = c > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return sign != 0 && is_simple(poly);
}

bool is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(poly[i], poly[next(i, n)], poly[j], poly[next(j, n)])) return false;
    }
  }
  return true;
}

double perimeter(std::span<const Vec2> poly) {
  double l = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) l += (poly[next(i, poly.size())] - poly[i]).norm();
  return l;
}

double max_radius(std::span<const Vec2> poly, Vec2 center) {
  double r = 0.0;
  for (const Vec2& p : poly) r = std::max(r, (p - center).norm());
  return r;
}

Polygon transformed(std::span<const Vec2> local, const Pose2& pose) {
  Polygon out;
  out.reserve(local.size());
  for (const Vec2& p : local) out.push_back(pose.apply(p));
  return out;
}

Vec2 edge_normal(std::span<const Vec2> poly, int edge) {
  const Vec2 e = poly[next(static_cast<std::size_t>(edge), poly.size())] - poly[edge];
  return normalized(Vec2{e.z, -e.x});
}

double convex_signed_distance(std::span<const Vec2> poly, Vec2 p, int* face) {
  double best = -std::numeric_limits<double>::infinity();
  int best_face = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const double d = dot(edge_normal(poly, static_cast<int>(i)), p - poly[i]);
    if (d > best) {
      best = d;
      best_face = static_cast<int>(i);
    }
  }
  if (face) *face = best_face;
  return best;
}

bool vertical_extent(std::span<const Vec2> poly, double x, double& z_low, double& z_high) {
  bool hit = false;
  z_low = std::numeric_limits<double>::infinity();
  z_high = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[next(i, poly.size())];
    const double lo = std::min(p.x, q.x), hi = std::max(p.x, q.x);
    if (x < lo || x > hi) continue;
    double z;
    if (hi - lo < 1e-12) {
      z_low = std::min({z_low, p.z, q.z});
      z_high = std::max({z_high, p.z, q.z});
      hit = true;
      continue;
    }
    z = p.z + (q.z - p.z) * (x - p.x) / (q.x - p.x);
    z_low = std::min(z_low, z);
    z_high = std::max(z_high, z);
    hit = true;
  }
  return hit;
}

Manifold collide_convex(std::span<const Vec2> a, std::span<const Vec2> b, double margin) {
  Manifold m;
  const AxisResult sa = max_face_separation(a, b);
  if (sa.separation > margin) return m;
  const AxisResult sb = max_face_separation(b, a);
  if (sb.separation > margin) return m;

  // Reference face from whichever polygon gives the larger separation (with a small bias for
  // stable selection between frames).
  const bool flip = sb.separation > sa.separation + 1e-4;
  const std::span<const Vec2> ref = flip ? b : a;
  const std::span<const Vec2> inc = flip ? a : b;
  const int ref_edge = flip ? sb.edge : sa.edge;
  const Vec2 n = edge_normal(ref, ref_edge);

  // Incident edge: most anti-parallel to the reference normal.
  int inc_edge = 0;
  double min_dot = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < inc.size(); ++i) {
    const double d = dot(n, edge_normal(inc, static_cast<int>(i)));
    if (d < min_dot) {
      min_dot = d;
      inc_edge = static_cast<int>(i);
    }
  }
  Vec2 clip[2] = {inc[inc_edge], inc[next(static_cast<std::size_t>(inc_edge), inc.size())]};

  const Vec2 v1 = ref[ref_edge];
  const Vec2 v2 = ref[next(static_cast<std::size_t>(ref_edge), ref.size())];
  const Vec2 tangent = normalized(v2 - v1);

  // Clip the incident segment to the side planes of the reference face.
  auto clip_segment = [](Vec2 in[2], Vec2 dir, double offset, Vec2 out[2]) {
    int count = 0;
    const double d0 = dot(dir, in[0]) - offset;
    const double d1 = dot(dir, in[1]) - offset;
    if (d0 <= 0) out[count++] = in[0];
    if (d1 <= 0) out[count++] = in[1];
    if (d0 * d1 < 0) out[count++] = in[0] + (in[1] - in[0]) * (d0 / (d0 - d1));
    return count;
  };
  Vec2 tmp[2];
  if (clip_segment(clip, -tangent, -dot(tangent, v1), tmp) < 2) return m;
  Vec2 out[2];
  if (clip_segment(tmp, tangent, dot(tangent, v2), out) < 2) return m;

  m.normal = flip ? -n : n;
  for (const Vec2& p : out) {
    const double sep = dot(n, p - v1);
    if (sep > margin) continue;
    // Contact point on the surface of B.
    const Vec2 on_ref = p - n * sep;
    const Vec2 point_b = flip ? on_ref : p;
    m.points[m.count++] = ContactPoint{point_b, sep};
  }
  return m;
}

}  // namespace rockcap::physics
