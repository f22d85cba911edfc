#include "rockcap/ppo/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rockcap::ppo {

double clipped_surrogate(double log_prob_new, double log_prob_old, double advantage,
                         double clip_range) {
  const double rho = std::exp(log_prob_new - log_prob_old);
  const double clipped = std::clamp(rho, 1.0 - clip_range, 1.0 + clip_range);
  return std::min(rho * advantage, clipped * advantage);
}

double clipped_surrogate_grad(double log_prob_new, double log_prob_old, double advantage,
                              double clip_range) {
  const double rho = std::exp(log_prob_new - log_prob_old);
  const double clipped = std::clamp(rho, 1.0 - clip_range, 1.0 + clip_range);
  if (rho == clipped || rho * advantage < clipped * advantage) return rho * advantage;
  return 0.0;
}

double total_loss(const std::vector<double>& surrogate, const std::vector<double>& value_pred,
                  const std::vector<double>& returns, const std::vector<double>& entropy,
                  double vf_coef, double entropy_coef) {
  const std::size_t n = surrogate.size();
  if (value_pred.size() != n || returns.size() != n || entropy.size() != n || n == 0)
    throw std::invalid_argument("total_loss: input lengths differ or are empty");
  double s = 0.0, v = 0.0, e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += surrogate[i];
    const double d = value_pred[i] - returns[i];
    v += d * d;
    e += entropy[i];
  }
  return -s / n + vf_coef * v / n - entropy_coef * e / n;
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= adv.size();
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / adv.size());
  for (double& a : adv) a = sd > 0.0 ? (a - mean) / sd : a - mean;
}

MinibatchLoss ppo_loss_and_grads(const nn::GaussianPolicy& policy, const nn::ValueNet& value,
                                 const Minibatch& batch, double clip_range, double vf_coef,
                                 double entropy_coef, nn::Vector& policy_grad,
                                 nn::Vector& value_grad) {
  const int n = batch.obs.cols();
  const int k = policy.log_std.size();
  if (n == 0 || batch.actions.cols() != n || static_cast<int>(batch.advantages.size()) != n ||
      static_cast<int>(batch.returns.size()) != n || static_cast<int>(batch.old_log_prob.size()) != n)
    throw std::invalid_argument("ppo_loss_and_grads: inconsistent minibatch");

  nn::MlpCache pcache, vcache;
  const nn::Matrix mu = policy.mean_net.forward(batch.obs, &pcache);
  const nn::Matrix v = value.net.forward(batch.obs, &vcache);
  const nn::Vector ls = policy.clamped_log_std();
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);

  MinibatchLoss out;
  nn::Matrix d_mu(k, n);
  nn::Vector d_ls = nn::Vector::Zero(k);
  nn::Matrix d_v(1, n);
  int clipped = 0;
  for (int j = 0; j < n; ++j) {
    double lp = 0.0;
    for (int i = 0; i < k; ++i) {
      const double z = (batch.actions(i, j) - mu(i, j)) / std::exp(ls[i]);
      lp += -0.5 * z * z - ls[i] - half_log_2pi;
    }
    const double log_ratio = lp - batch.old_log_prob[j];
    const double a = batch.advantages[j];
    out.policy_loss -= clipped_surrogate(lp, batch.old_log_prob[j], a, clip_range) / n;
    const double g = -clipped_surrogate_grad(lp, batch.old_log_prob[j], a, clip_range) / n;
    for (int i = 0; i < k; ++i) {
      const double sigma = std::exp(ls[i]);
      const double diff = batch.actions(i, j) - mu(i, j);
      d_mu(i, j) = g * diff / (sigma * sigma);
      d_ls[i] += g * (diff * diff / (sigma * sigma) - 1.0);
    }
    const double rho = std::exp(log_ratio);
    if (std::abs(rho - 1.0) > clip_range) ++clipped;
    out.approx_kl += ((rho - 1.0) - log_ratio) / n;

    const double dv = v(0, j) - batch.returns[j];
    out.value_loss += dv * dv / n;
    d_v(0, j) = vf_coef * 2.0 * dv / n;
  }
  out.entropy = nn::gaussian_entropy(ls);
  for (int i = 0; i < k; ++i) d_ls[i] -= entropy_coef;
  out.total = out.policy_loss + vf_coef * out.value_loss - entropy_coef * out.entropy;
  out.clip_fraction = static_cast<double>(clipped) / n;

  nn::Vector mean_grad = nn::Vector::Zero(policy.mean_net.parameter_count());
  policy.mean_net.backward(pcache, d_mu, mean_grad);
  for (int i = 0; i < k; ++i)
    if (policy.log_std[i] < nn::kLogStdMin || policy.log_std[i] > nn::kLogStdMax) d_ls[i] = 0.0;
  policy_grad.resize(policy.parameter_count());
  policy_grad << mean_grad, d_ls;
  value_grad = nn::Vector::Zero(value.net.parameter_count());
  value.net.backward(vcache, d_v, value_grad);
  return out;
}

}  // namespace rockcap::ppo
