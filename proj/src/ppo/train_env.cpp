#include "rockcap/ppo/train_env.hpp"

#include <algorithm>

namespace rockcap::ppo {

namespace {

nn::Vector to_vector(const env::Observation& o) {
  return Eigen::Map<const nn::Vector>(o.data(), o.size());
}

}  // namespace

nn::Vector RockTrainEnv::reset(std::uint64_t seed) { return to_vector(env_.reset(seed)); }

EnvStep RockTrainEnv::step(const nn::Vector& action) {
  const env::StepResult r = env_.step({action[0], action[1], action[2]});
  EnvStep s;
  s.obs = to_vector(r.obs);
  s.reward = r.reward;
  s.boundary = r.done();
  s.in_goal = r.info.c_goal;
  return s;
}

EnvFactory rock_env_factory(const env::EpisodeConfig& config,
                            const physics::ExcavatorGeometry& geometry,
                            const physics::SoilMaterial& material) {
  return [=](int) {
    return std::make_unique<RockTrainEnv>(env::RockCaptureEnv(config, geometry, material));
  };
}

nn::Vector PointGoalEnv::reset(std::uint64_t seed) {
  RandomStream rng(seed);
  x_ = rng.uniform(-1.0, 1.0);
  t_ = 0;
  return nn::Vector::Constant(1, x_);
}

EnvStep PointGoalEnv::step(const nn::Vector& action) {
  x_ = std::clamp(x_ + 0.1 * std::clamp(action[0], -1.0, 1.0), -2.0, 2.0);
  ++t_;
  EnvStep s;
  s.obs = nn::Vector::Constant(1, x_);
  s.reward = -x_ * x_;
  s.boundary = t_ >= 50;
  s.in_goal = std::abs(x_) < 0.05;
  return s;
}

}  // namespace rockcap::ppo
