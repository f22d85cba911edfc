#include "rockcap/physics/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace rockcap::physics {

namespace {

enum ContactTag : int { kTerrainContact = 1, kBucketContact = 2 };

bool finite3(const Vec3& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

RigidBody rock_body(const WorldState& s, const RockShape& rock) {
  RigidBody b;
  b.position = {s.rock_pose.x, s.rock_pose.z};
  b.angle = s.rock_pose.angle;
  b.velocity = {s.rock_vel.vx, s.rock_vel.vz};
  b.omega = s.rock_vel.omega;
  b.inv_mass = 1.0 / rock.mass();
  b.inv_inertia = 1.0 / rock.inertia();
  return b;
}

Polygon body_outline(const RigidBody& b, const RockShape& rock) {
  return transformed(rock.vertices, Pose2{b.position, b.angle});
}

bool is_convex_corner(const TerrainField& t, std::size_t i) {
  if (i == 0 || i + 1 >= t.size()) return false;
  return t.heights[i] > 0.5 * (t.heights[i - 1] + t.heights[i + 1]) + 1e-9;
}

void terrain_contacts(const Polygon& outline, RigidBody& ground, RigidBody& rock,
                      const TerrainField& terrain, double margin, double friction,
                      std::vector<Contact>& out) {
  for (const Vec2& v : outline) {
    const double h = terrain.height_at(v.x);
    const double s = terrain.slope_at(v.x);
    const double scale = std::sqrt(1.0 + s * s);
    const double sep = (v.z - h) / scale;
    if (sep >= margin) continue;
    Contact c;
    c.a = &ground;
    c.b = &rock;
    c.normal = Vec2{-s, 1.0} / scale;
    c.point = v;
    c.separation = sep;
    c.friction = friction;
    c.tag = kTerrainContact;
    out.push_back(c);
  }
  // Ridge nodes can poke into a rock face between two vertices.
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec2& v : outline) {
    lo = std::min(lo, v.x);
    hi = std::max(hi, v.x);
  }
  if (terrain.size() == 0) return;
  const double u0 = std::max(1.0, std::ceil((lo - margin - terrain.x_origin) / terrain.cell_size));
  const double u1 = std::min(static_cast<double>(terrain.size()) - 2.0,
                             std::floor((hi + margin - terrain.x_origin) / terrain.cell_size));
  for (double u = u0; u <= u1; u += 1.0) {
    const auto i = static_cast<std::size_t>(u);
    if (!is_convex_corner(terrain, i)) continue;
    const Vec2 p{terrain.x_at(i), terrain.heights[i]};
    int face = 0;
    const double sd = convex_signed_distance(outline, p, &face);
    if (sd >= margin) continue;
    const Vec2 n = edge_normal(outline, face);
    if (n.z > 0.3) continue;
    Contact c;
    c.a = &ground;
    c.b = &rock;
    c.normal = -n;
    c.point = p;
    c.separation = sd;
    c.friction = friction;
    c.tag = kTerrainContact;
    out.push_back(c);
  }
}

void bucket_contacts(const Polygon& outline, const std::vector<Polygon>& plates, RigidBody& bucket,
                     RigidBody& rock, double margin, double friction, std::vector<Contact>& out) {
  for (const Polygon& plate : plates) {
    const Manifold m = collide_convex(plate, outline, margin);
    for (int k = 0; k < m.count; ++k) {
      Contact c;
      c.a = &bucket;
      c.b = &rock;
      c.normal = m.normal;
      c.point = m.points[k].point;
      c.separation = m.points[k].separation;
      c.friction = friction;
      c.tag = kBucketContact;
      out.push_back(c);
    }
  }
}

double max_terrain_penetration(const Polygon& outline, const TerrainField& terrain) {
  double worst = 0.0;
  for (const Vec2& v : outline) worst = std::max(worst, terrain.height_at(v.x) - v.z);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec2& v : outline) {
    lo = std::min(lo, v.x);
    hi = std::max(hi, v.x);
  }
  for (std::size_t i = 0; i < terrain.size(); ++i) {
    const double x = terrain.x_at(i);
    if (x < lo || x > hi) continue;
    worst = std::max(worst, -convex_signed_distance(outline, {x, terrain.heights[i]}));
  }
  return worst;
}

double max_bucket_penetration(const Polygon& outline, const std::vector<Polygon>& plates) {
  double worst = 0.0;
  for (const Polygon& plate : plates) {
    const Manifold m = collide_convex(plate, outline, 0.0);
    for (int k = 0; k < m.count; ++k) worst = std::max(worst, -m.points[k].separation);
  }
  return worst;
}

// Presses the ground down under a rock that cannot be pushed out of it (pinched by the bucket).
void compact_under_rock(TerrainField& terrain, const Polygon& outline, double tolerance) {
  for (const Vec2& v : outline) {
    const double pen = terrain.height_at(v.x) - v.z;
    if (pen <= tolerance) continue;
    const double u = (v.x - terrain.x_origin) / terrain.cell_size;
    if (u < 0.0 || u > static_cast<double>(terrain.size() - 1)) continue;
    const auto i = std::min(static_cast<std::size_t>(u), terrain.size() - 2);
    terrain.heights[i] -= pen;
    terrain.heights[i + 1] -= pen;
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec2& v : outline) {
    lo = std::min(lo, v.x);
    hi = std::max(hi, v.x);
  }
  for (std::size_t i = 0; i < terrain.size(); ++i) {
    const double x = terrain.x_at(i);
    if (x < lo || x > hi) continue;
    double z_low, z_high;
    if (!vertical_extent(outline, x, z_low, z_high)) continue;
    if (terrain.heights[i] > z_low + tolerance) terrain.heights[i] = z_low;
  }
}

struct Load {
  Vec2 point;
  Vec2 force;  // N
};

Vec3 joint_forces_from(const WorldModel& model, const KinematicPose& pose,
                       const std::vector<Load>& bucket_loads, double gravity) {
  const ExcavatorGeometry& g = model.geometry;
  Vec3 f{};
  auto accumulate = [&](Vec2 point, Joint link, Vec2 force) {
    const auto jac = point_jacobian(g, pose, point, link);
    for (int i = 0; i < 3; ++i) f[i] -= dot(jac[i], force);
  };
  const Vec2 boom_mid = (pose.boom_foot + pose.arm_pivot) * 0.5;
  const Vec2 arm_mid = (pose.arm_pivot + pose.bucket_pivot) * 0.5;
  accumulate(boom_mid, kBoom, {0.0, -g.link_masses[0] * gravity});
  accumulate(arm_mid, kArm, {0.0, -g.link_masses[1] * gravity});
  accumulate(pose.bucket_center, kBucket, {0.0, -g.link_masses[2] * gravity});
  for (const Load& l : bucket_loads) accumulate(l.point, kBucket, l.force);
  const double cap = model.params.joint_force_cap;
  for (double& v : f) v = std::clamp(v / 1000.0, -cap, cap);
  return f;
}

}  // namespace

bool WorldState::all_finite() const {
  return finite3(actuator_ext) && finite3(actuator_vel) && std::isfinite(rock_pose.x) &&
         std::isfinite(rock_pose.z) && std::isfinite(rock_pose.angle) &&
         std::isfinite(rock_vel.vx) && std::isfinite(rock_vel.vz) &&
         std::isfinite(rock_vel.omega) && std::isfinite(rock_lateral_y) && terrain.all_finite() &&
         std::isfinite(bucket_soil_mass) && std::isfinite(cabin_pitch) &&
         std::isfinite(cabin_roll) && finite3(joint_forces) && std::isfinite(sim_time);
}

TerrainField default_terrain() { return TerrainField::flat(-15.0, 1.0, 0.05, 0.0); }

RockPose rock_on_terrain_spawn(const RockShape& rock, double x, const TerrainField& terrain) {
  if (!std::isfinite(x) || !terrain.contains(x))
    throw std::domain_error("rock_on_terrain_spawn: x outside the terrain span");
  return RockPose{x, terrain.height_at(x) + 0.5 + rock.clearance_radius(), 0.0};
}

Polygon rock_polygon_world(const WorldState& s, const RockShape& rock) {
  return transformed(rock.vertices, Pose2{{s.rock_pose.x, s.rock_pose.z}, s.rock_pose.angle});
}

double rock_mechanical_energy(const WorldState& s, const RockShape& rock, double gravity) {
  const double m = rock.mass();
  const double v2 = s.rock_vel.vx * s.rock_vel.vx + s.rock_vel.vz * s.rock_vel.vz;
  return 0.5 * m * v2 + 0.5 * rock.inertia() * s.rock_vel.omega * s.rock_vel.omega +
         m * gravity * s.rock_pose.z;
}

double terrain_penetration(const WorldState& s, const RockShape& rock) {
  return max_terrain_penetration(rock_polygon_world(s, rock), s.terrain);
}

double bucket_penetration(const WorldState& s, const WorldModel& model) {
  const KinematicPose pose = forward_kinematics(model.geometry, s.actuator_ext);
  return max_bucket_penetration(rock_polygon_world(s, model.rock),
                                bucket_wall_plates(model.geometry, pose.bucket_frame));
}

Vec3 static_joint_forces(const WorldState& s, const WorldModel& model) {
  const KinematicPose pose = forward_kinematics(model.geometry, s.actuator_ext);
  std::vector<Load> loads;
  if (s.bucket_soil_mass > 0.0)
    loads.push_back({pose.bucket_center, {0.0, -s.bucket_soil_mass * model.params.gravity}});
  return joint_forces_from(model, pose, loads, model.params.gravity);
}

WorldState step(const WorldState& state, const Vec3& commanded_speeds, const WorldModel& model,
                double dt, RandomStream& rng, StepDiagnostics* diagnostics) {
  if (!state.all_finite() || !finite3(commanded_speeds) || !(dt > 0.0))
    throw std::logic_error("physics::step: non-finite state or command");
  const ExcavatorGeometry& g = model.geometry;
  const PhysicsParams& pp = model.params;
  const RockShape& rock = model.rock;
  StepDiagnostics diag;
  WorldState next = state;

  // Actuators: first-order lag towards the command, clamped at the stroke limits.
  const double blend = 1.0 - std::exp(-dt / pp.actuator_tau);
  for (int i = 0; i < 3; ++i) {
    const double v = state.actuator_vel[i] + (commanded_speeds[i] - state.actuator_vel[i]) * blend;
    const double q = g.actuators[i].clamp(state.actuator_ext[i] + v * dt);
    next.actuator_ext[i] = q;
    next.actuator_vel[i] = (q == state.actuator_ext[i] + v * dt) ? v : (q - state.actuator_ext[i]) / dt;
  }
  const KinematicPose pose_old = forward_kinematics(g, state.actuator_ext);
  const KinematicPose pose_new = forward_kinematics(g, next.actuator_ext);

  RigidBody bucket;
  bucket.position = pose_old.bucket_pivot;
  bucket.angle = pose_old.link_angles[2];
  bucket.velocity = (pose_new.bucket_pivot - pose_old.bucket_pivot) / dt;
  bucket.omega = (pose_new.link_angles[2] - pose_old.link_angles[2]) / dt;
  const Vec2 tip_velocity = (pose_new.bucket_tip - pose_old.bucket_tip) / dt;

  // Soil-tool interaction on the moved bucket.
  SoilToolParams soil_params;
  soil_params.tool_width = g.bucket_width;
  soil_params.dt = dt;
  soil_params.gravity = pp.gravity;
  soil_params.penalty_gain = pp.soil_penalty_gain;
  diag.soil = soil_reaction(pose_new.bucket_polygon_world, tip_velocity, next.terrain,
                            model.material, soil_params);
  const double carved_area = carve_terrain(next.terrain, pose_new.bucket_polygon_world,
                                           diag.soil.removed_volume / g.bucket_width);
  diag.carved_volume = carved_area * g.bucket_width;
  const double capacity_mass = g.bucket_capacity * model.material.density;
  next.bucket_soil_mass = std::min(capacity_mass, next.bucket_soil_mass +
                                                      diag.carved_volume * model.material.density);
  const Vec2 opening = rotate({0.0, 1.0}, pose_new.link_angles[2]);
  if (opening.z < 0.0) next.bucket_soil_mass *= std::exp(-dt / pp.soil_spill_time);

  // Rock dynamics.
  RigidBody ground;
  RigidBody body = rock_body(state, rock);
  body.velocity.z -= pp.gravity * dt;

  const double margin = pp.speculative_margin + body.velocity.norm() * dt +
                        std::abs(body.omega) * rock.clearance_radius() * dt +
                        tip_velocity.norm() * dt;
  std::vector<Contact> contacts;
  contacts.reserve(32);
  const Polygon outline_old = body_outline(body, rock);
  terrain_contacts(outline_old, ground, body, next.terrain, margin, pp.friction_rock_terrain,
                   contacts);
  bucket_contacts(outline_old, bucket_wall_plates(g, pose_old.bucket_frame), bucket, body, margin,
                  pp.friction_rock_bucket, contacts);

  ContactSolverSettings settings;
  settings.iterations = pp.velocity_iterations;
  settings.restitution = pp.restitution;
  solve_contact_velocities(contacts, dt, settings);

  Vec2 bucket_force;
  std::vector<Load> bucket_loads;
  for (const Contact& c : contacts) {
    const Vec2 impulse = c.normal * c.normal_impulse + perp(c.normal) * c.tangent_impulse;
    if (c.tag == kTerrainContact) {
      if (c.normal_impulse > 0.0) diag.rock_on_terrain = true;
    } else {
      if (c.normal_impulse > 0.0) diag.rock_on_bucket = true;
      diag.bucket_normal_impulse += c.normal_impulse;
      diag.bucket_tangent_impulse += std::abs(c.tangent_impulse);
      const Vec2 force = -impulse / dt;
      bucket_force += force;
      bucket_loads.push_back({c.point, force});
    }
  }
  if (diag.rock_on_terrain) {
    const double damping = 1.0 / (1.0 + pp.soil_drag * dt);
    body.velocity *= damping;
    body.omega *= damping;
    if (!diag.rock_on_bucket && body.velocity.norm() < pp.rest_speed &&
        std::abs(body.omega) * rock.clearance_radius() < pp.rest_speed) {
      body.velocity = {};
      body.omega = 0.0;
    }
  }

  body.position += body.velocity * dt;
  body.angle += body.omega * dt;

  // Position projection against the moved bucket and the terrain.
  RigidBody bucket_new = bucket;
  bucket_new.position = pose_new.bucket_pivot;
  bucket_new.angle = pose_new.link_angles[2];
  const std::vector<Polygon> plates_new = bucket_wall_plates(g, pose_new.bucket_frame);
  for (int it = 0; it < pp.position_iterations; ++it) {
    std::vector<Contact> pc;
    const Polygon outline = body_outline(body, rock);
    terrain_contacts(outline, ground, body, next.terrain, 0.0, 0.0, pc);
    bucket_contacts(outline, plates_new, bucket_new, body, 0.0, 0.0, pc);
    if (pc.empty()) break;
    project_contact_positions(pc, pp.contact_slop, 0.2, 0.8);
  }
  // Hard bound: the bucket is kinematic, so bucket penetration is removed first and the ground
  // gives way if the rock is pinched.
  for (int it = 0; it < 4; ++it) {
    std::vector<Contact> pc;
    bucket_contacts(body_outline(body, rock), plates_new, bucket_new, body, 0.0, 0.0, pc);
    if (pc.empty()) break;
    if (project_contact_positions(pc, pp.contact_slop, 1.0, 1.0) <= pp.contact_slop) break;
  }
  const Polygon outline_final = body_outline(body, rock);
  if (max_terrain_penetration(outline_final, next.terrain) > pp.contact_slop)
    compact_under_rock(next.terrain, outline_final, pp.contact_slop);

  next.rock_pose = {body.position.x, body.position.z, body.angle};
  next.rock_vel = {body.velocity.x, body.velocity.z, body.omega};

  // Out-of-plane drift from tangential bucket impulses.
  if (diag.bucket_tangent_impulse > 0.0) {
    const double stddev = pp.lateral_kick_gain * diag.bucket_tangent_impulse * body.inv_mass;
    next.rock_lateral_y += rng.normal(0.0, stddev);
  }

  // Quasi-static cabin tilt from the loads carried by the bucket.
  std::vector<Load> loads = bucket_loads;
  if (diag.soil.force.squared_norm() > 0.0)
    loads.push_back({diag.soil.application_point, diag.soil.force});
  if (next.bucket_soil_mass > 0.0)
    loads.push_back({pose_new.bucket_center, {0.0, -next.bucket_soil_mass * pp.gravity}});
  const Vec2 edge{-g.track_half_length, 0.0};
  double tipping = 0.0;
  for (const Load& l : loads) {
    const Vec2 r = l.point - edge;
    tipping += r.x * l.force.z - r.z * l.force.x;
  }
  const double restoring = g.machine_mass * pp.gravity * (g.machine_com_x - edge.x);
  next.cabin_pitch = std::clamp(pp.pitch_limit * tipping / restoring, -pp.pitch_limit,
                                pp.pitch_limit);
  if (diag.rock_on_bucket) {
    next.cabin_roll = pp.roll_limit * (2.0 / std::numbers::pi) *
                      std::atan(next.rock_lateral_y / pp.roll_length_scale);
  } else {
    next.cabin_roll = state.cabin_roll * std::exp(-dt / pp.roll_decay_time);
  }
  next.joint_forces = joint_forces_from(model, pose_new, loads, pp.gravity);
  next.sim_time = state.sim_time + dt;

  diag.bucket_contact_force = bucket_force;
  diag.terrain_penetration = max_terrain_penetration(outline_final, next.terrain);
  diag.bucket_penetration = max_bucket_penetration(outline_final, plates_new);
  if (diagnostics) *diagnostics = diag;
  if (!next.all_finite()) throw std::logic_error("physics::step produced a non-finite state");
  return next;
}

nlohmann::json world_to_json(const WorldState& w) {
  return {{"actuator_ext", w.actuator_ext},
          {"actuator_vel", w.actuator_vel},
          {"rock_pose", {w.rock_pose.x, w.rock_pose.z, w.rock_pose.angle}},
          {"rock_vel", {w.rock_vel.vx, w.rock_vel.vz, w.rock_vel.omega}},
          {"rock_lateral_y", w.rock_lateral_y},
          {"terrain",
           {{"cell_size", w.terrain.cell_size},
            {"x_origin", w.terrain.x_origin},
            {"heights", w.terrain.heights}}},
          {"bucket_soil_mass", w.bucket_soil_mass},
          {"cabin_pitch", w.cabin_pitch},
          {"cabin_roll", w.cabin_roll},
          {"joint_forces", w.joint_forces},
          {"sim_time", w.sim_time}};
}

WorldState world_from_json(const nlohmann::json& j) {
  WorldState w;
  w.actuator_ext = j.at("actuator_ext").get<Vec3>();
  w.actuator_vel = j.at("actuator_vel").get<Vec3>();
  const auto pose = j.at("rock_pose").get<Vec3>();
  w.rock_pose = {pose[0], pose[1], pose[2]};
  const auto vel = j.at("rock_vel").get<Vec3>();
  w.rock_vel = {vel[0], vel[1], vel[2]};
  w.rock_lateral_y = j.at("rock_lateral_y").get<double>();
  const auto& t = j.at("terrain");
  w.terrain.cell_size = t.at("cell_size").get<double>();
  w.terrain.x_origin = t.at("x_origin").get<double>();
  w.terrain.heights = t.at("heights").get<std::vector<double>>();
  w.bucket_soil_mass = j.at("bucket_soil_mass").get<double>();
  w.cabin_pitch = j.at("cabin_pitch").get<double>();
  w.cabin_roll = j.at("cabin_roll").get<double>();
  w.joint_forces = j.at("joint_forces").get<Vec3>();
  w.sim_time = j.at("sim_time").get<double>();
  return w;
}

}  // namespace rockcap::physics
