#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rockcap/env/task.hpp"
#include "rockcap/physics/rock.hpp"

namespace rockcap::env {

struct Randomization {
  Vec2 goal_mean{-7.0, 1.5};
  Vec2 goal_std{0.1, 0.1};
  double goal_radius = 0.3;
  double density_mean = 2000.0;
  double density_std = 85.0;
  std::vector<physics::RockFamily> families{physics::RockFamily::I, physics::RockFamily::II};
  double rock_x_min = -11.5;
  double rock_x_max = -8.0;
};

struct EpisodeConfig {
  int horizon = 500;
  double dt = 1.0 / 60.0;
  int settle_steps = 30;
  Randomization randomization;
  std::string material = "dirt";
  RewardWeights weights;
  ObsBounds bounds;  // filled from the geometry unless given

  void validate() const;
};

// Table-1 randomization with the default geometry's observation bounds.
EpisodeConfig default_episode_config();
// Fixed family I rock at x = -9.0, goal at the mean, dirt.
EpisodeConfig simplified_episode_config();

nlohmann::json episode_config_to_json(const EpisodeConfig& c);
// Missing keys take defaults; unknown keys are rejected with their path.
EpisodeConfig episode_config_from_json(const nlohmann::json& j);
EpisodeConfig load_episode_config(const std::filesystem::path& path);

}  // namespace rockcap::env
