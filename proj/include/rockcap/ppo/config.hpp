#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace rockcap::ppo {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_range = 0.2;
  double entropy_coef = 3e-4;
  double vf_coef = 0.5;
  double max_grad_norm = 0.5;
  double learning_rate = 3e-4;
  int epochs = 4;
  int minibatch_size = 128;
  int n_steps = 2048;  // per environment
  int n_envs = 4;
  std::uint64_t total_timesteps = 200000;
  std::vector<int> policy_hidden{128, 128};
  std::vector<int> value_hidden{128, 128};
  int checkpoint_every = 10;  // rollouts; 0 disables periodic checkpoints
  int metric_window = 100;    // episodes

  int rollout_size() const { return n_steps * n_envs; }
  int iterations() const;
  void validate() const;
};

nlohmann::json ppo_config_to_json(const PpoConfig& c);
PpoConfig ppo_config_from_json(const nlohmann::json& j);
PpoConfig load_ppo_config(const std::filesystem::path& path);

}  // namespace rockcap::ppo
