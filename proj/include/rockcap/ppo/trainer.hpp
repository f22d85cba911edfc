#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rockcap/nn/checkpoint.hpp"
#include "rockcap/ppo/config.hpp"
#include "rockcap/ppo/loss.hpp"
#include "rockcap/ppo/train_env.hpp"

namespace rockcap::ppo {

struct CurveRow {
  std::uint64_t total_steps = 0;
  double mean_cumreward = 0.0;  // over the last metric_window episodes
  double success_rate = 0.0;    // held-at-goal fraction over the same window
  std::uint64_t episodes = 0;   // completed so far
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double log_std_mean = 0.0;
  double wall_time = 0.0;  // s since the run started; excluded from determinism checks

  bool same_except_wall_time(const CurveRow& o) const;
};

std::string curve_header();
std::string curve_line(const CurveRow& r);
std::vector<CurveRow> read_curve(std::istream& in);

struct TrainOptions {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;  // empty: no files written
  std::string config_hash;
  std::function<void(const CurveRow&)> on_rollout;
};

// Fraction of successes; the window is whatever the caller passes.
double success_rate(const std::deque<bool>& window);

class Trainer {
 public:
  Trainer(PpoConfig config, EnvFactory factory, TrainOptions options);

  // Restores networks, optimizer and the full rollout state from a checkpoint written by this
  // trainer, so that continuing matches an uninterrupted run.
  void resume(const nn::Checkpoint& checkpoint);

  // One rollout plus update; returns the curve row.
  CurveRow iterate();
  // Iterates until config.iterations() rollouts have been done in total.
  void run();

  nn::Checkpoint checkpoint() const;
  const std::vector<CurveRow>& curve() const { return curve_; }
  const nn::GaussianPolicy& policy() const { return policy_; }
  const nn::ValueNet& value() const { return value_; }
  int iterations_done() const { return iteration_; }
  std::uint64_t total_steps() const { return total_steps_; }
  const PpoConfig& config() const { return config_; }

  // Runs only the update phase on a given buffer (testing hook).
  struct Buffer {
    nn::Matrix obs, actions;
    std::vector<double> log_prob, advantages, returns;
  };
  MinibatchLoss update(const Buffer& buffer);

 private:
  struct EnvSlot {
    std::unique_ptr<TrainEnv> env;
    nn::Vector obs;
    RandomStream noise{0};
    RandomStream seeds{0};
    double episode_return = 0.0;
    std::vector<bool> in_goal;
  };

  void start_episode(EnvSlot& slot);
  nlohmann::json save_state() const;
  void load_state(const nlohmann::json& j);
  void write_outputs(const CurveRow& row, bool final);

  PpoConfig config_;
  EnvFactory factory_;
  TrainOptions options_;
  nn::GaussianPolicy policy_;
  nn::ValueNet value_;
  nn::AdamState policy_adam_;
  nn::AdamState value_adam_;
  std::vector<EnvSlot> envs_;
  RandomStream shuffle_{0};
  std::deque<double> returns_window_;
  std::deque<bool> success_window_;
  std::uint64_t episodes_ = 0;
  std::uint64_t total_steps_ = 0;
  int iteration_ = 0;
  std::vector<CurveRow> curve_;
  double wall_offset_ = 0.0;
  double started_ = 0.0;
};

}  // namespace rockcap::ppo
