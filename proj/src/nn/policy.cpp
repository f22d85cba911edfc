#include "rockcap/nn/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rockcap::nn {

namespace {

std::vector<int> chain(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

}  // namespace

GaussianPolicy::GaussianPolicy(int obs_dim, int act_dim, const std::vector<int>& hidden)
    : mean_net(chain(obs_dim, hidden, act_dim)), log_std(Vector::Zero(act_dim)) {}

Vector GaussianPolicy::clamped_log_std() const {
  return log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

double gaussian_log_prob(const Vector& a, const Vector& mean, const Vector& log_std) {
  double lp = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double z = (a[i] - mean[i]) / std::exp(log_std[i]);
    lp += -0.5 * z * z - log_std[i] - 0.5 * kLog2Pi;
  }
  return lp;
}

double gaussian_entropy(const Vector& log_std) {
  double h = 0.0;
  for (int i = 0; i < log_std.size(); ++i) h += 0.5 + 0.5 * kLog2Pi + log_std[i];
  return h;
}

PolicySample GaussianPolicy::sample(const Vector& obs, RandomStream& noise) const {
  const Vector mu = mean(obs);
  const Vector ls = clamped_log_std();
  PolicySample s;
  s.action.resize(mu.size());
  for (int i = 0; i < mu.size(); ++i) s.action[i] = mu[i] + std::exp(ls[i]) * noise.normal();
  s.log_prob = gaussian_log_prob(s.action, mu, ls);
  return s;
}

double GaussianPolicy::log_prob(const Vector& obs, const Vector& action) const {
  return gaussian_log_prob(action, mean(obs), clamped_log_std());
}

double GaussianPolicy::entropy() const { return gaussian_entropy(clamped_log_std()); }

Vector GaussianPolicy::flat() const {
  Vector p(parameter_count());
  p << mean_net.flat(), log_std;
  return p;
}

void GaussianPolicy::set_flat(const Vector& p) {
  if (p.size() != parameter_count())
    throw std::invalid_argument("policy parameter vector has the wrong length");
  const int n = mean_net.parameter_count();
  mean_net.set_flat(p.head(n));
  log_std = p.tail(log_std.size());
}

ValueNet::ValueNet(int obs_dim, const std::vector<int>& hidden) : net(chain(obs_dim, hidden, 1)) {}

void init_policy(GaussianPolicy& policy, RandomStream& rng) {
  policy.mean_net.init_orthogonal(rng, std::sqrt(2.0), 0.01);
  policy.log_std.setZero();
}

void init_value(ValueNet& value, RandomStream& rng) {
  value.net.init_orthogonal(rng, std::sqrt(2.0), 1.0);
}

void adam_step(AdamState& s, Vector& params, const Vector& grads) {
  if (grads.size() != params.size())
    throw std::invalid_argument("adam_step: gradient and parameter sizes differ");
  if (s.m.size() == 0) s.m = Vector::Zero(params.size());
  if (s.v.size() == 0) s.v = Vector::Zero(params.size());
  if (s.m.size() != params.size() || s.v.size() != params.size())
    throw std::invalid_argument("adam_step: optimizer moments do not match the parameters");
  ++s.step;
  s.m = s.beta1 * s.m + (1.0 - s.beta1) * grads;
  s.v = s.beta2 * s.v + (1.0 - s.beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (int i = 0; i < params.size(); ++i) {
    const double m_hat = s.m[i] / c1;
    const double v_hat = s.v[i] / c2;
    params[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

double clip_grad_norm(std::vector<Vector*> grads, double max_norm) {
  double sq = 0.0;
  for (const Vector* g : grads) sq += g->squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (Vector* g : grads) *g *= scale;
  }
  return norm;
}

}  // namespace rockcap::nn
