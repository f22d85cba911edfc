#pragma once

#include <vector>

namespace rockcap::ppo {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// One environment's trajectory segment. next_values[t] is V(s_{t+1}) for the state actually
// reached by step t (for a step that ended an episode, the final observation of that episode).
// terminal[t]: no bootstrap at all. boundary[t]: the episode ended after t, which cuts the
// lambda chain; truncations and horizon ends are boundaries that still bootstrap.
GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<double>& next_values, const std::vector<bool>& terminal,
                      const std::vector<bool>& boundary, double gamma, double lambda);

// Single-episode form: the value after the last step is `bootstrap_value`, and a terminal flag
// both stops bootstrapping and cuts the chain.
GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      double bootstrap_value, const std::vector<bool>& terminal, double gamma,
                      double lambda);

}  // namespace rockcap::ppo
