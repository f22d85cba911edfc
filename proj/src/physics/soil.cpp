#include "rockcap/physics/soil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace rockcap::physics {

namespace {

struct Overlap {
  std::size_t node;
  double z_low;   // tool lower boundary at the node
  double depth;   // terrain height above the lower boundary
};

void polygon_x_span(std::span<const Vec2> poly, double& lo, double& hi) {
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (const Vec2& p : poly) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
}

std::vector<Overlap> node_overlaps(std::span<const Vec2> poly, const TerrainField& terrain) {
  std::vector<Overlap> out;
  if (terrain.size() == 0) return out;
  double lo, hi;
  polygon_x_span(poly, lo, hi);
  const double u0 = std::ceil((lo - terrain.x_origin) / terrain.cell_size);
  const double u1 = std::floor((hi - terrain.x_origin) / terrain.cell_size);
  const double last = static_cast<double>(terrain.size() - 1);
  for (double u = std::max(0.0, u0); u <= std::min(u1, last); u += 1.0) {
    const auto i = static_cast<std::size_t>(u);
    double z_low, z_high;
    if (!vertical_extent(poly, terrain.x_at(i), z_low, z_high)) continue;
    const double depth = terrain.heights[i] - z_low;
    if (depth > 0.0) out.push_back({i, z_low, depth});
  }
  return out;
}

}  // namespace

double passive_pressure_coefficient(const SoilMaterial& m) {
  const double t = std::tan(std::numbers::pi / 4.0 + m.internal_friction_angle / 2.0);
  return t * t * (1.0 + std::sin(m.dilatancy_angle));
}

SoilReaction soil_reaction(std::span<const Vec2> poly, Vec2 velocity, const TerrainField& terrain,
                           const SoilMaterial& material, const SoilToolParams& params) {
  SoilReaction r;
  const std::vector<Overlap> overlaps = node_overlaps(poly, terrain);

  // Submerged point cloud: lower-boundary samples, vertices under the surface, and the surface
  // directly above each of them.
  std::vector<Vec2> submerged;
  double depth = 0.0;
  Vec2 deepest;
  for (const Overlap& o : overlaps) {
    const double x = terrain.x_at(o.node);
    submerged.push_back({x, o.z_low});
    submerged.push_back({x, terrain.heights[o.node]});
    if (o.depth > depth) {
      depth = o.depth;
      deepest = {x, o.z_low};
    }
  }
  for (const Vec2& v : poly) {
    const double h = terrain.height_at(v.x);
    if (v.z < h) {
      submerged.push_back(v);
      submerged.push_back({v.x, h});
      if (h - v.z > depth) {
        depth = h - v.z;
        deepest = v;
      }
    }
  }
  if (submerged.empty()) return r;

  // Boundary length under the surface, walked along the polygon edges in small steps.
  double length = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    const double edge = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(edge / (0.25 * terrain.cell_size))));
    for (int k = 0; k < n; ++k) {
      const Vec2 m = a + (b - a) * ((k + 0.5) / n);
      if (m.z < terrain.height_at(m.x)) length += edge / n;
    }
  }
  double area = 0.0;
  for (const Overlap& o : overlaps) {
    double z_low, z_high;
    vertical_extent(poly, terrain.x_at(o.node), z_low, z_high);
    area += (std::min(terrain.heights[o.node], z_high) - o.z_low) * terrain.cell_size;
  }

  r.submerged_depth = depth;
  r.contact_length = length;
  r.submerged_area = area;
  r.application_point = deepest;

  const double speed = velocity.norm();
  if (!(speed > 1e-12)) return r;
  const Vec2 dir = velocity / speed;

  const double kp = passive_pressure_coefficient(material);
  const double gamma = material.density * params.gravity;
  const double w = params.tool_width;
  double magnitude = w * (0.5 * gamma * depth * depth * kp +
                          material.cohesion * length * 2.0 * std::sqrt(kp));
  magnitude += params.penalty_gain * material.youngs_modulus * area * w * std::max(0.0, -dir.z);
  r.force = dir * (-magnitude);

  const Vec2 across = perp(dir);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec2& p : submerged) {
    const double s = dot(across, p);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  r.removed_volume = (hi - lo) * speed * params.dt * w;
  return r;
}

double carve_terrain(TerrainField& terrain, std::span<const Vec2> poly, double area) {
  if (!(area > 0.0)) return 0.0;
  const std::vector<Overlap> overlaps = node_overlaps(poly, terrain);
  double available = 0.0;
  for (const Overlap& o : overlaps) available += o.depth * terrain.cell_size;
  if (!(available > 0.0)) return 0.0;
  const double fraction = std::min(1.0, area / available);
  for (const Overlap& o : overlaps) terrain.heights[o.node] -= fraction * o.depth;
  return fraction * available;
}

}  // namespace rockcap::physics
