#include "rockcap/ppo/gae.hpp"

#include <stdexcept>

namespace rockcap::ppo {

GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<double>& next_values, const std::vector<bool>& terminal,
                      const std::vector<bool>& boundary, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || terminal.size() != n ||
      boundary.size() != n)
    throw std::invalid_argument("compute_gae: input lengths differ");
  GaeResult r;
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double bootstrap = terminal[k] ? 0.0 : next_values[k];
    const double delta = rewards[k] + gamma * bootstrap - values[k];
    const bool cut = terminal[k] || boundary[k];
    const double adv = delta + (cut ? 0.0 : gamma * lambda * next_adv);
    r.advantages[k] = adv;
    r.returns[k] = adv + values[k];
    next_adv = adv;
  }
  return r;
}

GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      double bootstrap_value, const std::vector<bool>& terminal, double gamma,
                      double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || terminal.size() != n)
    throw std::invalid_argument("compute_gae: input lengths differ");
  std::vector<double> next(n);
  for (std::size_t t = 0; t < n; ++t) next[t] = t + 1 < n ? values[t + 1] : bootstrap_value;
  return compute_gae(rewards, values, next, terminal, terminal, gamma, lambda);
}

}  // namespace rockcap::ppo
