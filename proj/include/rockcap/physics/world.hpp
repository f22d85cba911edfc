#pragma once

#include <nlohmann/json_fwd.hpp>

#include "rockcap/core/rng.hpp"
#include "rockcap/physics/contact.hpp"
#include "rockcap/physics/geometry.hpp"
#include "rockcap/physics/kinematics.hpp"
#include "rockcap/physics/material.hpp"
#include "rockcap/physics/rock.hpp"
#include "rockcap/physics/soil.hpp"
#include "rockcap/physics/terrain.hpp"

namespace rockcap::physics {

inline constexpr double kDefaultDt = 1.0 / 60.0;

struct RockPose {
  double x = 0.0;
  double z = 0.0;
  double angle = 0.0;
  bool operator==(const RockPose&) const = default;
};

struct RockVelocity {
  double vx = 0.0;
  double vz = 0.0;
  double omega = 0.0;
  bool operator==(const RockVelocity&) const = default;
};

struct WorldState {
  Vec3 actuator_ext{};    // m
  Vec3 actuator_vel{};    // m/s
  RockPose rock_pose;
  RockVelocity rock_vel;
  double rock_lateral_y = 0.0;  // out-of-plane offset, m
  TerrainField terrain;
  double bucket_soil_mass = 0.0;  // kg
  double cabin_pitch = 0.0;       // theta, rad
  double cabin_roll = 0.0;        // phi, rad
  Vec3 joint_forces{};            // kN
  double sim_time = 0.0;          // s

  bool all_finite() const;
  bool operator==(const WorldState&) const = default;
};

nlohmann::json world_to_json(const WorldState& w);
WorldState world_from_json(const nlohmann::json& j);

struct PhysicsParams {
  double gravity = 9.81;
  double actuator_tau = 0.05;          // s, first-order lag of joint speeds
  double lateral_kick_gain = 0.02;     // s; y kick std = gain * |tangential impulse| / mass
  double friction_rock_bucket = 0.5;
  double friction_rock_terrain = 0.6;
  double restitution = 0.0;
  double contact_slop = 0.005;         // m, penetration tolerated before projection
  double max_penetration = 0.01;       // m, hard bound enforced at the end of every step
  double speculative_margin = 0.05;    // m
  int velocity_iterations = 20;
  int position_iterations = 6;
  double soil_drag = 0.6;              // 1/s, damping while the rock touches the ground
  double rest_speed = 1e-4;            // below this a grounded rock is put to rest
  double pitch_limit = 0.35;           // rad, pitch at the tipping moment
  double roll_limit = 0.2;             // rad
  double roll_length_scale = 1.0;      // m
  double roll_decay_time = 0.25;       // s
  double soil_penalty_gain = 0.1;      // see SoilToolParams
  double soil_spill_time = 0.5;        // s, when the bucket opening faces down
  double joint_force_cap = 300.0;      // kN
};

struct StepDiagnostics {
  SoilReaction soil;
  double carved_volume = 0.0;
  double terrain_penetration = 0.0;  // after the step
  double bucket_penetration = 0.0;   // after the step
  double bucket_tangent_impulse = 0.0;
  double bucket_normal_impulse = 0.0;
  bool rock_on_bucket = false;
  bool rock_on_terrain = false;
  Vec2 bucket_contact_force;         // N, on the bucket
};

// Everything the step needs besides the state.
struct WorldModel {
  ExcavatorGeometry geometry;
  SoilMaterial material;
  RockShape rock;
  PhysicsParams params;
};

// Advances the world by dt with semi-implicit Euler. `commanded_speeds` are physical joint speeds
// (m/s). Throws std::logic_error on non-finite input state.
WorldState step(const WorldState& state, const Vec3& commanded_speeds, const WorldModel& model,
                double dt, RandomStream& rng, StepDiagnostics* diagnostics = nullptr);

// Rock placed 0.5 m above the ground at x (plus its clearance radius), at rest, upright.
RockPose rock_on_terrain_spawn(const RockShape& rock, double x, const TerrainField& terrain);

// Default terrain: flat ground at z = 0 spanning the workspace with margin.
TerrainField default_terrain();

// Recomputes the quasi-static joint forces for the current pose with no contact loads.
Vec3 static_joint_forces(const WorldState& state, const WorldModel& model);

// Kinetic plus gravitational potential energy of the rock (J).
double rock_mechanical_energy(const WorldState& state, const RockShape& rock, double gravity);

// Current penetration depths of the rock into the terrain and into the bucket walls (m, >= 0).
double terrain_penetration(const WorldState& state, const RockShape& rock);
double bucket_penetration(const WorldState& state, const WorldModel& model);

// World-frame rock outline.
Polygon rock_polygon_world(const WorldState& state, const RockShape& rock);

}  // namespace rockcap::physics
