#pragma once

#include <array>

#include "rockcap/core/vec2.hpp"
#include "rockcap/physics/geometry.hpp"

namespace rockcap::env {

inline constexpr int kObsDim = 17;
inline constexpr int kActDim = 3;

using Observation = std::array<double, kObsDim>;
using Action = std::array<double, kActDim>;

// Observation layout.
enum ObsIndex {
  kQBoom, kQArm, kQBucket,
  kVBoom, kVArm, kVBucket,
  kFBoom, kFArm, kFBucket,
  kXBucket, kZBucket,
  kXRock, kZRock,
  kXGoal, kZGoal,
  kTheta, kPhi,
};

struct RewardWeights {
  double w1 = 13.0;
  double w2 = 8.0;
  double w3 = 3.0 * 200.0 * 200.0;
  double w4 = 12.0;
  double w5 = 1.0;
  double delta_prox = 0.2;   // m
  double delta_tilt = 0.1;   // rad
  double x_truncate = -13.0; // m
  double y_truncate = 1.0;   // m
  double goal_reward = 5.0;

  void validate() const;
};

struct ObsBounds {
  Observation min{};
  Observation max{};

  void validate() const;
};

// Workspace x in [-13, 0], z in [-1, 6], forces +-300 kN, tilt +-0.2 rad, joints from the geometry.
ObsBounds default_obs_bounds(const physics::ExcavatorGeometry& geometry);

// Clip to [-1, 1] and scale by the joint speed limits.
physics::Vec3 scale_action(const Action& a, const physics::Vec3& max_speeds);
Action clip_action(const Action& a);

bool c_proximity(double x_rock, double z_rock, Vec2 goal, double delta_prox);
bool c_tilting(double theta, double phi, double delta_tilt);
bool c_goal(bool c_prox, bool c_tilt);
bool c_truncate(double x_rock, double y_rock, const RewardWeights& w);

// The five guidance terms in order: x error, z error, energy, smoothness, tilt. All <= 0.
struct GuidanceTerms {
  double x_error = 0.0;
  double z_error = 0.0;
  double energy = 0.0;
  double smoothness = 0.0;
  double tilt = 0.0;

  double sum() const { return x_error + z_error + energy + smoothness + tilt; }
};

// a_t and a_prev in normalized units, f_t in kN.
GuidanceTerms guidance_terms(double x_rock, double z_rock, Vec2 goal, const Action& a_t,
                             const physics::Vec3& f_t, const Action& a_prev, double theta,
                             double phi, const RewardWeights& w);
double guidance_reward(double x_rock, double z_rock, Vec2 goal, const Action& a_t,
                       const physics::Vec3& f_t, const Action& a_prev, double theta, double phi,
                       const RewardWeights& w);
double goal_reward(bool c_goal, const RewardWeights& w = {});
double total_reward(double guidance, double goal);
// Smallest per-step reward for a rock inside the observation box, actions in [-1, 1], forces within
// the bounds and tilt below pi/2.
double reward_lower_bound(const RewardWeights& w, const ObsBounds& bounds);

Observation normalize_obs(const Observation& raw, const ObsBounds& bounds);
Observation denormalize_obs(const Observation& normalized, const ObsBounds& bounds);

// Initial manipulator extensions keyed on the rock's spawn x.
physics::Vec3 initial_extensions(double rock_x);

// Pulls a sample lying beyond `radius` from `mean` back onto the circle along the ray from the mean.
Vec2 project_goal(Vec2 sample, Vec2 mean, double radius);

}  // namespace rockcap::env
