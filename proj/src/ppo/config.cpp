#include "rockcap/ppo/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace rockcap::ppo {

using nlohmann::json;

int PpoConfig::iterations() const {
  return static_cast<int>(std::max<std::uint64_t>(1, total_timesteps / rollout_size()));
}

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma: must lie in (0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw std::invalid_argument("gae_lambda: must lie in [0, 1]");
  if (!(clip_range > 0.0)) throw std::invalid_argument("clip_range: must be > 0");
  if (!(entropy_coef >= 0.0)) throw std::invalid_argument("entropy_coef: must be >= 0");
  if (!(vf_coef >= 0.0)) throw std::invalid_argument("vf_coef: must be >= 0");
  if (!(max_grad_norm > 0.0)) throw std::invalid_argument("max_grad_norm: must be > 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate: must be > 0");
  if (epochs <= 0) throw std::invalid_argument("epochs: must be > 0");
  if (n_steps <= 0 || n_envs <= 0) throw std::invalid_argument("n_steps, n_envs: must be > 0");
  if (minibatch_size <= 0 || rollout_size() % minibatch_size != 0)
    throw std::invalid_argument("minibatch_size: must divide n_steps * n_envs");
  if (total_timesteps == 0) throw std::invalid_argument("total_timesteps: must be > 0");
  if (policy_hidden.empty() || value_hidden.empty())
    throw std::invalid_argument("hidden layers: at least one required");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every: must be >= 0");
  if (metric_window <= 0) throw std::invalid_argument("metric_window: must be > 0");
}

json ppo_config_to_json(const PpoConfig& c) {
  return {{"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},
          {"clip_range", c.clip_range},
          {"entropy_coef", c.entropy_coef},
          {"vf_coef", c.vf_coef},
          {"max_grad_norm", c.max_grad_norm},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"minibatch_size", c.minibatch_size},
          {"n_steps", c.n_steps},
          {"n_envs", c.n_envs},
          {"total_timesteps", c.total_timesteps},
          {"policy_hidden", c.policy_hidden},
          {"value_hidden", c.value_hidden},
          {"checkpoint_every", c.checkpoint_every},
          {"metric_window", c.metric_window}};
}

PpoConfig ppo_config_from_json(const json& j) {
  PpoConfig c;
  const std::set<std::string> allowed = {
      "gamma",          "gae_lambda", "clip_range",    "entropy_coef",  "vf_coef",
      "max_grad_norm",  "learning_rate", "epochs",     "minibatch_size", "n_steps",
      "n_envs",         "total_timesteps", "policy_hidden", "value_hidden",
      "checkpoint_every", "metric_window"};
  if (!j.is_object()) throw std::invalid_argument("ppo config: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw std::invalid_argument("unknown config key: " + it.key());
  auto read = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    try {
      out = j.at(key).get<std::decay_t<decltype(out)>>();
    } catch (const json::exception&) {
      throw std::invalid_argument(std::string("config key ") + key + ": wrong type");
    }
  };
  read("gamma", c.gamma);
  read("gae_lambda", c.gae_lambda);
  read("clip_range", c.clip_range);
  read("entropy_coef", c.entropy_coef);
  read("vf_coef", c.vf_coef);
  read("max_grad_norm", c.max_grad_norm);
  read("learning_rate", c.learning_rate);
  read("epochs", c.epochs);
  read("minibatch_size", c.minibatch_size);
  read("n_steps", c.n_steps);
  read("n_envs", c.n_envs);
  read("total_timesteps", c.total_timesteps);
  read("policy_hidden", c.policy_hidden);
  read("value_hidden", c.value_hidden);
  read("checkpoint_every", c.checkpoint_every);
  read("metric_window", c.metric_window);
  c.validate();
  return c;
}

PpoConfig load_ppo_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ppo config: " + path.string());
  return ppo_config_from_json(json::parse(in, nullptr, true, true));
}

}  // namespace rockcap::ppo
