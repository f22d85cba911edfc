#include "rockcap/env/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rockcap::env {

using nlohmann::json;

void EpisodeConfig::validate() const {
  if (horizon <= 0) throw std::invalid_argument("horizon: must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("dt: must be > 0");
  if (settle_steps < 0) throw std::invalid_argument("settle_steps: must be >= 0");
  const Randomization& r = randomization;
  if (!(r.goal_std.x >= 0.0 && r.goal_std.z >= 0.0))
    throw std::invalid_argument("goal.std: must be >= 0");
  if (!(r.goal_radius > 0.0)) throw std::invalid_argument("goal.radius: must be > 0");
  if (!(r.density_mean > 0.0) || !(r.density_std >= 0.0))
    throw std::invalid_argument("rock.density: mean > 0 and std >= 0 required");
  if (r.families.empty()) throw std::invalid_argument("rock.families: must not be empty");
  if (!(r.rock_x_min <= r.rock_x_max))
    throw std::invalid_argument("rock.x_range: min must not exceed max");
  if (r.rock_x_min < -11.5 - 1e-12 || r.rock_x_max > -8.0 + 1e-12)
    throw std::invalid_argument("rock.x_range: must lie inside the workspace [-11.5, -8.0]");
  weights.validate();
  bounds.validate();
}

EpisodeConfig default_episode_config() {
  EpisodeConfig c;
  c.bounds = default_obs_bounds(physics::default_geometry());
  return c;
}

EpisodeConfig simplified_episode_config() {
  EpisodeConfig c = default_episode_config();
  c.randomization.goal_std = {0.0, 0.0};
  c.randomization.families = {physics::RockFamily::I};
  c.randomization.rock_x_min = -9.0;
  c.randomization.rock_x_max = -9.0;
  c.material = "dirt";
  return c;
}

namespace {

std::vector<double> to_vec(const Observation& o) { return {o.begin(), o.end()}; }

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw std::invalid_argument(path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("unknown config key: " + (path.empty() ? "" : path + ".") +
                                  it.key());
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config key " + path + key + ": wrong type");
  }
}

Vec2 read_pair(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("config key " + path + ": expected [x, z]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Observation read_obs(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != kObsDim)
    throw std::invalid_argument("config key " + path + ": expected 17 numbers");
  Observation o;
  for (int i = 0; i < kObsDim; ++i) o[i] = j[i].get<double>();
  return o;
}

}  // namespace

json episode_config_to_json(const EpisodeConfig& c) {
  const Randomization& r = c.randomization;
  json families = json::array();
  for (auto f : r.families) families.push_back(std::string(physics::to_string(f)));
  const RewardWeights& w = c.weights;
  return {
      {"horizon", c.horizon},
      {"dt", c.dt},
      {"settle_steps", c.settle_steps},
      {"material", c.material},
      {"goal",
       {{"mean", {r.goal_mean.x, r.goal_mean.z}},
        {"std", {r.goal_std.x, r.goal_std.z}},
        {"radius", r.goal_radius}}},
      {"rock",
       {{"density_mean", r.density_mean},
        {"density_std", r.density_std},
        {"families", families},
        {"x_range", {r.rock_x_min, r.rock_x_max}}}},
      {"reward",
       {{"w1", w.w1},
        {"w2", w.w2},
        {"w3", w.w3},
        {"w4", w.w4},
        {"w5", w.w5},
        {"delta_prox", w.delta_prox},
        {"delta_tilt", w.delta_tilt},
        {"x_truncate", w.x_truncate},
        {"y_truncate", w.y_truncate},
        {"goal_reward", w.goal_reward}}},
      {"obs_bounds", {{"min", to_vec(c.bounds.min)}, {"max", to_vec(c.bounds.max)}}},
  };
}

EpisodeConfig episode_config_from_json(const json& j) {
  EpisodeConfig c = default_episode_config();
  check_keys(j, "", {"horizon", "dt", "settle_steps", "material", "goal", "rock", "reward",
                     "obs_bounds"});
  read(j, "horizon", c.horizon, "");
  read(j, "dt", c.dt, "");
  read(j, "settle_steps", c.settle_steps, "");
  read(j, "material", c.material, "");
  Randomization& r = c.randomization;
  if (j.contains("goal")) {
    const json& g = j["goal"];
    check_keys(g, "goal", {"mean", "std", "radius"});
    if (g.contains("mean")) r.goal_mean = read_pair(g["mean"], "goal.mean");
    if (g.contains("std")) r.goal_std = read_pair(g["std"], "goal.std");
    read(g, "radius", r.goal_radius, "goal.");
  }
  if (j.contains("rock")) {
    const json& k = j["rock"];
    check_keys(k, "rock", {"density_mean", "density_std", "families", "x_range"});
    read(k, "density_mean", r.density_mean, "rock.");
    read(k, "density_std", r.density_std, "rock.");
    if (k.contains("families")) {
      r.families.clear();
      for (const json& f : k["families"])
        r.families.push_back(physics::rock_family_from_string(f.get<std::string>()));
    }
    if (k.contains("x_range")) {
      const Vec2 range = read_pair(k["x_range"], "rock.x_range");
      r.rock_x_min = range.x;
      r.rock_x_max = range.z;
    }
  }
  if (j.contains("reward")) {
    const json& k = j["reward"];
    check_keys(k, "reward", {"w1", "w2", "w3", "w4", "w5", "delta_prox", "delta_tilt",
                             "x_truncate", "y_truncate", "goal_reward"});
    RewardWeights& w = c.weights;
    read(k, "w1", w.w1, "reward.");
    read(k, "w2", w.w2, "reward.");
    read(k, "w3", w.w3, "reward.");
    read(k, "w4", w.w4, "reward.");
    read(k, "w5", w.w5, "reward.");
    read(k, "delta_prox", w.delta_prox, "reward.");
    read(k, "delta_tilt", w.delta_tilt, "reward.");
    read(k, "x_truncate", w.x_truncate, "reward.");
    read(k, "y_truncate", w.y_truncate, "reward.");
    read(k, "goal_reward", w.goal_reward, "reward.");
  }
  if (j.contains("obs_bounds")) {
    const json& k = j["obs_bounds"];
    check_keys(k, "obs_bounds", {"min", "max"});
    if (k.contains("min")) c.bounds.min = read_obs(k["min"], "obs_bounds.min");
    if (k.contains("max")) c.bounds.max = read_obs(k["max"], "obs_bounds.max");
  }
  c.validate();
  return c;
}

EpisodeConfig load_episode_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open env config: " + path.string());
  return episode_config_from_json(json::parse(in, nullptr, true, true));
}

}  // namespace rockcap::env
