#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rockcap/env/env.hpp"

namespace rockcap::env {

inline constexpr int kRecordSchema = 1;

struct StepRecord {
  double sim_time = 0.0;
  Observation raw_obs{};
  Observation obs{};
  Action action{};
  physics::Vec3 speeds{};
  double reward = 0.0;
  std::array<double, 6> reward_terms{};
  bool c_proximity = false;
  bool c_tilting = false;
  bool c_goal = false;
  bool truncated = false;
  bool terminated = false;

  bool operator==(const StepRecord&) const = default;
};

// One episode, agent or human, as a line-delimited log: a header line, one line per step and a
// summary line.
struct EpisodeRecord {
  int schema = kRecordSchema;
  std::string source = "agent";  // agent | human
  std::string scenario;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string version;
  nlohmann::json env_config;
  nlohmann::json geometry;
  nlohmann::json material;
  Vec2 goal;
  std::string rock_family;
  double rock_density = 0.0;
  double rock_x = 0.0;
  Observation initial_raw_obs{};
  Observation initial_obs{};
  std::vector<StepRecord> steps;
  bool aborted = false;

  double cumulative_reward() const;
  bool success() const;
  bool truncated() const { return !steps.empty() && steps.back().truncated; }
};

// Held-at-goal predicate: c_goal on the final step, or at least `min_in_goal` in-goal steps
// among the last `window`.
bool held_at_goal(const std::vector<bool>& in_goal, int window = 60, int min_in_goal = 30);

// Starts a record for a freshly reset env.
EpisodeRecord begin_record(const RockCaptureEnv& env, const std::string& source,
                           const std::string& scenario, const std::string& config_hash);
StepRecord make_step_record(const RockCaptureEnv& env, const StepResult& r);

nlohmann::json header_to_json(const EpisodeRecord& r);
nlohmann::json step_to_json(const StepRecord& s);
StepRecord step_from_json(const nlohmann::json& j);

void write_record(std::ostream& out, const EpisodeRecord& r);
// Throws std::runtime_error on malformed input and on a schema other than kRecordSchema.
EpisodeRecord read_record(std::istream& in);

}  // namespace rockcap::env
