#pragma once

#include <cstdint>
#include <optional>

#include <nlohmann/json_fwd.hpp>

#include "rockcap/env/config.hpp"
#include "rockcap/physics/world.hpp"

namespace rockcap::env {

struct StepInfo {
  bool c_proximity = false;
  bool c_tilting = false;
  bool c_goal = false;
  // Five guidance terms followed by the goal reward.
  std::array<double, 6> reward_terms{};
};

struct StepResult {
  Observation obs{};      // normalized
  Observation raw_obs{};
  double reward = 0.0;
  bool terminated = false;  // horizon reached
  bool truncated = false;   // rock out of reach
  StepInfo info;
  Action action{};          // clipped
  physics::Vec3 commanded_speeds{};

  bool done() const { return terminated || truncated; }
};

struct EpisodeSetup {
  Vec2 goal;
  physics::RockFamily family = physics::RockFamily::I;
  double density = 0.0;
  double rock_x = 0.0;
};

// Goal-conditioned rock capturing episode. Single-threaded; one instance per worker.
class RockCaptureEnv {
 public:
  RockCaptureEnv(EpisodeConfig config, physics::ExcavatorGeometry geometry,
                 physics::SoilMaterial material,
                 physics::PhysicsParams params = physics::PhysicsParams{});
  // Uses the default geometry and the named built-in material.
  explicit RockCaptureEnv(EpisodeConfig config);

  // Every episode must be seeded; a missing seed throws std::invalid_argument.
  Observation reset(std::optional<std::uint64_t> seed);
  // Throws std::logic_error when the episode has already ended or was never reset.
  StepResult step(const Action& action);

  // Replaces the world mid-episode, e.g. to test truncation paths.
  void inject_world(const physics::WorldState& world);

  Observation raw_observation() const;
  Observation observation() const { return normalize_obs(raw_observation(), config_.bounds); }

  const physics::WorldState& world() const { return world_; }
  const physics::WorldModel& model() const { return model_; }
  const EpisodeConfig& config() const { return config_; }
  const EpisodeSetup& setup() const { return setup_; }
  Vec2 goal() const { return setup_.goal; }
  int step_count() const { return step_count_; }
  bool active() const { return active_; }
  std::uint64_t seed() const { return seed_; }
  const Action& previous_action() const { return a_prev_; }

  // Full mid-episode state, for resuming training exactly.
  nlohmann::json save_state() const;
  void load_state(const nlohmann::json& j);

 private:
  EpisodeConfig config_;
  physics::WorldModel model_;
  physics::WorldState world_;
  EpisodeSetup setup_;
  RandomStream physics_rng_{0};
  Action a_prev_{};
  int step_count_ = 0;
  bool active_ = false;
  std::uint64_t seed_ = 0;
};

// Draws goal, rock family, density and spawn x for a seed.
EpisodeSetup sample_episode(const Randomization& r, RandomStream& rng);

}  // namespace rockcap::env
