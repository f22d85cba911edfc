#pragma once

#include <span>

#include "rockcap/physics/material.hpp"
#include "rockcap/physics/polygon.hpp"
#include "rockcap/physics/terrain.hpp"

namespace rockcap::physics {

struct SoilToolParams {
  double tool_width = 1.8;     // out-of-plane width of the bucket, m
  double dt = 1.0 / 60.0;      // s
  double gravity = 9.81;       // m/s^2
  double penalty_gain = 0.1;   // 1/m; scales E * submerged area into a penetration resistance
};

struct SoilReaction {
  Vec2 force;                  // N, acting on the tool
  double removed_volume = 0.0; // m^3 swept this step
  Vec2 application_point;      // deepest submerged point of the tool
  double submerged_depth = 0.0;
  double contact_length = 0.0; // submerged boundary length, m
  double submerged_area = 0.0; // m^2
};

// Passive earth-pressure coefficient tan^2(pi/4 + phi/2) * (1 + sin psi).
double passive_pressure_coefficient(const SoilMaterial& material);

// Separable earth-moving law:
//   |F| = w * (0.5 * gamma * d^2 * Kp + c * L * 2 sqrt(Kp)) + k * E * A * w * max(0, -v_hat.z)
// directed against the tool velocity. The removed volume is the swept cross-section
// (submerged extent perpendicular to v) * |v| * dt * w.
SoilReaction soil_reaction(std::span<const Vec2> tool_polygon, Vec2 tool_velocity,
                           const TerrainField& terrain, const SoilMaterial& material,
                           const SoilToolParams& params = {});

// Deducts up to `area` (m^2) from the terrain cells the tool overlaps, proportionally to each
// cell's overlap and never below the tool's lower boundary. Returns the area actually removed.
double carve_terrain(TerrainField& terrain, std::span<const Vec2> tool_polygon, double area);

}  // namespace rockcap::physics
