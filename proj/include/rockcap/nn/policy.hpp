#pragma once

#include "rockcap/nn/mlp.hpp"

namespace rockcap::nn {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

struct PolicySample {
  Vector action;  // unclipped
  double log_prob = 0.0;
};

// Diagonal Gaussian with a state-independent learned log standard deviation.
struct GaussianPolicy {
  Mlp mean_net;
  Vector log_std;

  GaussianPolicy() = default;
  GaussianPolicy(int obs_dim, int act_dim, const std::vector<int>& hidden);

  Vector clamped_log_std() const;
  Vector mean(const Vector& obs) const { return mean_net.forward(obs); }
  PolicySample sample(const Vector& obs, RandomStream& noise) const;
  double log_prob(const Vector& obs, const Vector& action) const;
  double entropy() const;

  // Parameters: mean net (flat) followed by log_std.
  int parameter_count() const { return mean_net.parameter_count() + log_std.size(); }
  Vector flat() const;
  void set_flat(const Vector& p);
  bool operator==(const GaussianPolicy& o) const {
    return mean_net == o.mean_net && log_std == o.log_std;
  }
};

double gaussian_log_prob(const Vector& action, const Vector& mean, const Vector& log_std);
double gaussian_entropy(const Vector& log_std);

struct ValueNet {
  Mlp net;

  ValueNet() = default;
  ValueNet(int obs_dim, const std::vector<int>& hidden);
  double value(const Vector& obs) const { return net.forward(obs)[0]; }
  bool operator==(const ValueNet& o) const { return net == o.net; }
};

// Orthogonal init: sqrt(2) hidden gain, 0.01 policy output, 1.0 value output; log_std = 0.
void init_policy(GaussianPolicy& policy, RandomStream& rng);
void init_value(ValueNet& value, RandomStream& rng);

struct AdamState {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  Vector m;
  Vector v;

  bool operator==(const AdamState& o) const {
    return lr == o.lr && beta1 == o.beta1 && beta2 == o.beta2 && eps == o.eps &&
           step == o.step && m == o.m && v == o.v;
  }
};

// Bias-corrected Adam update in place. Throws std::invalid_argument on shape mismatch.
void adam_step(AdamState& state, Vector& params, const Vector& grads);

// Scales grads so their joint L2 norm is at most max_norm; returns the norm before clipping.
double clip_grad_norm(std::vector<Vector*> grads, double max_norm);

}  // namespace rockcap::nn
