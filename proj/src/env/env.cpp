#include "rockcap/env/env.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rockcap::env {

using nlohmann::json;
namespace ph = physics;

EpisodeSetup sample_episode(const Randomization& r, RandomStream& rng) {
  EpisodeSetup s;
  const double gx = rng.normal(r.goal_mean.x, r.goal_std.x);
  const double gz = rng.normal(r.goal_mean.z, r.goal_std.z);
  s.goal = project_goal({gx, gz}, r.goal_mean, r.goal_radius);
  s.density = rng.normal(r.density_mean, r.density_std);
  s.family = r.families[rng.uniform_index(r.families.size())];
  s.rock_x = rng.uniform(r.rock_x_min, r.rock_x_max);
  return s;
}

RockCaptureEnv::RockCaptureEnv(EpisodeConfig config, ph::ExcavatorGeometry geometry,
                               ph::SoilMaterial material, ph::PhysicsParams params)
    : config_(std::move(config)) {
  config_.validate();
  geometry.validate();
  material.validate();
  model_.geometry = std::move(geometry);
  model_.material = std::move(material);
  model_.params = params;
}

RockCaptureEnv::RockCaptureEnv(EpisodeConfig config)
    : RockCaptureEnv(config, ph::default_geometry(), ph::material_by_name(config.material)) {}

Observation RockCaptureEnv::reset(std::optional<std::uint64_t> seed) {
  if (!seed) throw std::invalid_argument("reset requires a seed");
  seed_ = *seed;
  RandomStream rng = RandomStream::derive(seed_, 0);
  physics_rng_ = RandomStream::derive(seed_, 1);
  setup_ = sample_episode(config_.randomization, rng);
  model_.rock = ph::rock_fixture(setup_.family, setup_.density);

  world_ = ph::WorldState{};
  world_.terrain = ph::default_terrain();
  world_.actuator_ext = initial_extensions(setup_.rock_x);
  world_.rock_pose = ph::rock_on_terrain_spawn(model_.rock, setup_.rock_x, world_.terrain);
  world_.joint_forces = ph::static_joint_forces(world_, model_);
  for (int i = 0; i < config_.settle_steps; ++i)
    world_ = ph::step(world_, {0.0, 0.0, 0.0}, model_, config_.dt, physics_rng_);
  world_.sim_time = 0.0;

  a_prev_ = {};
  step_count_ = 0;
  active_ = true;
  return observation();
}

StepResult RockCaptureEnv::step(const Action& action) {
  if (!active_) throw std::logic_error("step called on an inactive episode; call reset first");
  StepResult r;
  r.action = clip_action(action);
  r.commanded_speeds = scale_action(r.action, model_.geometry.max_speeds);
  world_ = ph::step(world_, r.commanded_speeds, model_, config_.dt, physics_rng_);
  ++step_count_;

  const RewardWeights& w = config_.weights;
  const double xr = world_.rock_pose.x, zr = world_.rock_pose.z;
  const double theta = world_.cabin_pitch, phi = world_.cabin_roll;
  r.info.c_proximity = c_proximity(xr, zr, setup_.goal, w.delta_prox);
  r.info.c_tilting = c_tilting(theta, phi, w.delta_tilt);
  r.info.c_goal = c_goal(r.info.c_proximity, r.info.c_tilting);
  const GuidanceTerms g =
      guidance_terms(xr, zr, setup_.goal, r.action, world_.joint_forces, a_prev_, theta, phi, w);
  const double goal = goal_reward(r.info.c_goal, w);
  r.info.reward_terms = {g.x_error, g.z_error, g.energy, g.smoothness, g.tilt, goal};
  r.reward = total_reward(g.sum(), goal);

  r.terminated = step_count_ >= config_.horizon;
  r.truncated = c_truncate(xr, world_.rock_lateral_y, w);
  r.raw_obs = raw_observation();
  r.obs = normalize_obs(r.raw_obs, config_.bounds);
  a_prev_ = r.action;
  if (r.done()) active_ = false;
  return r;
}

void RockCaptureEnv::inject_world(const ph::WorldState& world) {
  if (!world.all_finite()) throw std::logic_error("injected world state is not finite");
  world_ = world;
}

Observation RockCaptureEnv::raw_observation() const {
  const ph::KinematicPose pose = ph::forward_kinematics(model_.geometry, world_.actuator_ext);
  Observation o;
  for (int j = 0; j < 3; ++j) {
    o[kQBoom + j] = world_.actuator_ext[j];
    o[kVBoom + j] = world_.actuator_vel[j];
    o[kFBoom + j] = world_.joint_forces[j];
  }
  o[kXBucket] = pose.bucket_center.x;
  o[kZBucket] = pose.bucket_center.z;
  o[kXRock] = world_.rock_pose.x;
  o[kZRock] = world_.rock_pose.z;
  o[kXGoal] = setup_.goal.x;
  o[kZGoal] = setup_.goal.z;
  o[kTheta] = world_.cabin_pitch;
  o[kPhi] = world_.cabin_roll;
  return o;
}

json RockCaptureEnv::save_state() const {
  return {{"world", ph::world_to_json(world_)},
          {"goal", {setup_.goal.x, setup_.goal.z}},
          {"family", std::string(ph::to_string(setup_.family))},
          {"density", setup_.density},
          {"rock_x", setup_.rock_x},
          {"rng", physics_rng_.serialize()},
          {"a_prev", a_prev_},
          {"step_count", step_count_},
          {"active", active_},
          {"seed", seed_}};
}

void RockCaptureEnv::load_state(const json& j) {
  world_ = ph::world_from_json(j.at("world"));
  setup_.goal = {j.at("goal")[0].get<double>(), j.at("goal")[1].get<double>()};
  setup_.family = ph::rock_family_from_string(j.at("family").get<std::string>());
  setup_.density = j.at("density").get<double>();
  setup_.rock_x = j.at("rock_x").get<double>();
  model_.rock = ph::rock_fixture(setup_.family, setup_.density);
  physics_rng_.deserialize(j.at("rng").get<std::string>());
  a_prev_ = j.at("a_prev").get<Action>();
  step_count_ = j.at("step_count").get<int>();
  active_ = j.at("active").get<bool>();
  seed_ = j.at("seed").get<std::uint64_t>();
}

}  // namespace rockcap::env
