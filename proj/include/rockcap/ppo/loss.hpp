#pragma once

#include <vector>

#include "rockcap/nn/policy.hpp"

namespace rockcap::ppo {

// min(rho * A, clip(rho, 1 - eps, 1 + eps) * A), rho = exp(new - old).
double clipped_surrogate(double log_prob_new, double log_prob_old, double advantage,
                         double clip_range);
// d/d(log_prob_new) of clipped_surrogate; zero on the flat clipped branch.
double clipped_surrogate_grad(double log_prob_new, double log_prob_old, double advantage,
                              double clip_range);

// -mean(surrogate) + vf_coef * mean((v - R)^2) - entropy_coef * mean(entropy)
double total_loss(const std::vector<double>& surrogate, const std::vector<double>& value_pred,
                  const std::vector<double>& returns, const std::vector<double>& entropy,
                  double vf_coef, double entropy_coef);

// Zero mean, unit (population) std when the std is positive.
void normalize_advantages(std::vector<double>& adv);

struct MinibatchLoss {
  double policy_loss = 0.0;  // -mean surrogate
  double value_loss = 0.0;   // mean squared error (before vf_coef)
  double entropy = 0.0;      // mean entropy
  double total = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

struct Minibatch {
  nn::Matrix obs;      // obs_dim x B
  nn::Matrix actions;  // act_dim x B
  std::vector<double> old_log_prob;
  std::vector<double> advantages;  // already normalized
  std::vector<double> returns;
};

// Loss and parameter gradients for one minibatch. Gradients are written (not accumulated).
MinibatchLoss ppo_loss_and_grads(const nn::GaussianPolicy& policy, const nn::ValueNet& value,
                                 const Minibatch& batch, double clip_range, double vf_coef,
                                 double entropy_coef, nn::Vector& policy_grad,
                                 nn::Vector& value_grad);

}  // namespace rockcap::ppo
