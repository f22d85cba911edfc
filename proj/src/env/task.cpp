#include "rockcap/env/task.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rockcap::env {

void RewardWeights::validate() const {
  for (double v : {w1, w2, w3, w4, w5, delta_prox, delta_tilt, y_truncate})
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("reward weights and thresholds must be positive");
  if (!(x_truncate < 0.0)) throw std::invalid_argument("x_truncate must be negative");
  if (!std::isfinite(goal_reward)) throw std::invalid_argument("goal_reward must be finite");
}

void ObsBounds::validate() const {
  for (int i = 0; i < kObsDim; ++i)
    if (!(min[i] < max[i]) || !std::isfinite(min[i]) || !std::isfinite(max[i]))
      throw std::invalid_argument("observation bounds must satisfy min < max per component");
}

ObsBounds default_obs_bounds(const physics::ExcavatorGeometry& g) {
  ObsBounds b;
  for (int j = 0; j < 3; ++j) {
    b.min[kQBoom + j] = g.actuators[j].min_ext;
    b.max[kQBoom + j] = g.actuators[j].max_ext;
    b.min[kVBoom + j] = -g.max_speeds[j];
    b.max[kVBoom + j] = g.max_speeds[j];
    b.min[kFBoom + j] = -300.0;
    b.max[kFBoom + j] = 300.0;
  }
  for (int i : {kXBucket, kXRock, kXGoal}) {
    b.min[i] = -13.0;
    b.max[i] = 0.0;
  }
  for (int i : {kZBucket, kZRock, kZGoal}) {
    b.min[i] = -1.0;
    b.max[i] = 6.0;
  }
  for (int i : {kTheta, kPhi}) {
    b.min[i] = -0.2;
    b.max[i] = 0.2;
  }
  return b;
}

Action clip_action(const Action& a) {
  Action out;
  for (int i = 0; i < kActDim; ++i) out[i] = std::isnan(a[i]) ? 0.0 : std::clamp(a[i], -1.0, 1.0);
  return out;
}

physics::Vec3 scale_action(const Action& a, const physics::Vec3& max_speeds) {
  const Action c = clip_action(a);
  return {c[0] * max_speeds[0], c[1] * max_speeds[1], c[2] * max_speeds[2]};
}

bool c_proximity(double x_rock, double z_rock, Vec2 goal, double delta_prox) {
  return std::abs(x_rock - goal.x) < delta_prox && std::abs(z_rock - goal.z) < delta_prox;
}

bool c_tilting(double theta, double phi, double delta_tilt) {
  return std::abs(phi) < delta_tilt && std::abs(theta) < delta_tilt;
}

bool c_goal(bool c_prox, bool c_tilt) { return c_prox && c_tilt; }

bool c_truncate(double x_rock, double y_rock, const RewardWeights& w) {
  return std::abs(y_rock) > w.y_truncate || x_rock < w.x_truncate;
}

GuidanceTerms guidance_terms(double x_rock, double z_rock, Vec2 goal, const Action& a_t,
                             const physics::Vec3& f_t, const Action& a_prev, double theta,
                             double phi, const RewardWeights& w) {
  double energy = 0.0, smooth = 0.0;
  for (int i = 0; i < kActDim; ++i) {
    const double p = a_t[i] * f_t[i];
    energy += p * p;
    const double d = a_t[i] - a_prev[i];
    smooth += d * d;
  }
  const double dx = x_rock - goal.x;
  const double dz = z_rock - goal.z;
  GuidanceTerms t;
  t.x_error = -(dx * dx) / w.w1;
  t.z_error = -(dz * dz) / w.w2;
  t.energy = -energy / w.w3;
  t.smoothness = -smooth / w.w4;
  t.tilt = -(theta * theta + phi * phi) / w.w5;
  return t;
}

double guidance_reward(double x_rock, double z_rock, Vec2 goal, const Action& a_t,
                       const physics::Vec3& f_t, const Action& a_prev, double theta, double phi,
                       const RewardWeights& w) {
  return guidance_terms(x_rock, z_rock, goal, a_t, f_t, a_prev, theta, phi, w).sum();
}

double goal_reward(bool c_goal, const RewardWeights& w) { return c_goal ? w.goal_reward : 0.0; }

double total_reward(double guidance, double goal) { return guidance + goal; }

double reward_lower_bound(const RewardWeights& w, const ObsBounds& b) {
  const double dx = std::max(b.max[kXRock] - b.min[kXGoal], b.max[kXGoal] - b.min[kXRock]);
  const double dz = std::max(b.max[kZRock] - b.min[kZGoal], b.max[kZGoal] - b.min[kZRock]);
  double energy = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double f = std::max(std::abs(b.min[kFBoom + j]), std::abs(b.max[kFBoom + j]));
    energy += f * f;
  }
  const double half_pi = std::acos(0.0);
  return -(dx * dx) / w.w1 - (dz * dz) / w.w2 - energy / w.w3 - 3.0 * 4.0 / w.w4 -
         2.0 * half_pi * half_pi / w.w5;
}

Observation normalize_obs(const Observation& raw, const ObsBounds& b) {
  Observation out;
  for (int i = 0; i < kObsDim; ++i)
    out[i] = std::clamp(2.0 * (raw[i] - b.min[i]) / (b.max[i] - b.min[i]) - 1.0, -1.0, 1.0);
  return out;
}

Observation denormalize_obs(const Observation& n, const ObsBounds& b) {
  Observation out;
  for (int i = 0; i < kObsDim; ++i) out[i] = b.min[i] + (n[i] + 1.0) * 0.5 * (b.max[i] - b.min[i]);
  return out;
}

physics::Vec3 initial_extensions(double x) {
  if (x >= -8.0) return {0.13, 0.24, -0.88};
  if (x >= -8.5) return {0.08, 0.11, -0.80};
  if (x >= -9.0) return {0.06, -0.03, -0.74};
  if (x >= -9.5) return {0.03, -0.15, -0.74};
  if (x >= -10.0) return {-0.01, -0.33, -0.70};
  if (x >= -10.5) return {-0.03, -0.39, -0.70};
  if (x >= -11.0) return {-0.10, -0.57, -0.70};
  if (x >= -11.5) return {-0.10, -0.70, -0.70};
  return {-0.16, -0.80, -0.78};
}

Vec2 project_goal(Vec2 sample, Vec2 mean, double radius) {
  const Vec2 d = sample - mean;
  const double r = d.norm();
  if (r <= radius) return sample;
  return mean + d * (radius / r);
}

}  // namespace rockcap::env
