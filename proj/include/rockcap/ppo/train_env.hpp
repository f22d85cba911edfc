#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include <nlohmann/json.hpp>

#include "rockcap/env/env.hpp"
#include "rockcap/nn/mlp.hpp"

namespace rockcap::ppo {

struct EnvStep {
  nn::Vector obs;         // observation after the step (the final one if the episode ended)
  double reward = 0.0;
  bool terminal = false;  // true terminal state: no bootstrap
  bool boundary = false;  // episode ended (terminal, truncated or horizon)
  bool in_goal = false;   // feeds the held-at-goal success metric
};

// Minimal environment interface the trainer drives.
class TrainEnv {
 public:
  virtual ~TrainEnv() = default;
  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  virtual nn::Vector reset(std::uint64_t seed) = 0;
  virtual EnvStep step(const nn::Vector& action) = 0;
  virtual nlohmann::json save_state() const = 0;
  virtual void load_state(const nlohmann::json& j) = 0;
};

using EnvFactory = std::function<std::unique_ptr<TrainEnv>(int index)>;

// Rock capturing env; horizon ends and truncations are boundaries that bootstrap.
class RockTrainEnv : public TrainEnv {
 public:
  explicit RockTrainEnv(env::RockCaptureEnv e) : env_(std::move(e)) {}
  int obs_dim() const override { return env::kObsDim; }
  int act_dim() const override { return env::kActDim; }
  nn::Vector reset(std::uint64_t seed) override;
  EnvStep step(const nn::Vector& action) override;
  nlohmann::json save_state() const override { return env_.save_state(); }
  void load_state(const nlohmann::json& j) override { env_.load_state(j); }
  const env::RockCaptureEnv& env() const { return env_; }

 private:
  env::RockCaptureEnv env_;
};

EnvFactory rock_env_factory(const env::EpisodeConfig& config,
                            const physics::ExcavatorGeometry& geometry,
                            const physics::SoilMaterial& material);

// 1-D point that should move to the origin: obs = [x], x += 0.1 * clip(a), reward = -x^2,
// 50-step episodes. The best achievable return is close to 0.
class PointGoalEnv : public TrainEnv {
 public:
  int obs_dim() const override { return 1; }
  int act_dim() const override { return 1; }
  nn::Vector reset(std::uint64_t seed) override;
  EnvStep step(const nn::Vector& action) override;
  nlohmann::json save_state() const override { return {{"x", x_}, {"t", t_}}; }
  void load_state(const nlohmann::json& j) override {
    x_ = j.at("x").get<double>();
    t_ = j.at("t").get<int>();
  }

 private:
  double x_ = 0.0;
  int t_ = 0;
};

}  // namespace rockcap::ppo
