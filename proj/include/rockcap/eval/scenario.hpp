#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rockcap/env/record.hpp"
#include "rockcap/nn/policy.hpp"

namespace rockcap::eval {

enum class Scenario { training_condition, unseen_rocks, unseen_material, human };

std::string_view to_string(Scenario s);
// Accepts both "unseen_rocks" and "unseen-rocks". Throws std::invalid_argument otherwise.
Scenario scenario_from_string(std::string_view s);
// The three agent scenarios, in report order.
std::vector<Scenario> agent_scenarios();
// Success rates reported for the reference agent, shown next to ours for comparison.
std::optional<double> reference_success_rate(Scenario s);

struct ScenarioConfig {
  Scenario name = Scenario::training_condition;
  std::vector<physics::RockFamily> families;
  std::string material;
  int episodes = 10;
  std::filesystem::path checkpoint;  // empty for the human scenario
};

// The families and material each scenario prescribes; everything else comes from the caller.
ScenarioConfig scenario_config(Scenario s, int episodes = 10);
env::EpisodeConfig apply_scenario(const ScenarioConfig& sc, env::EpisodeConfig base);

struct ScenarioMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Metrics {
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;
  double cumreward_mean = 0.0;
  double cumreward_std = 0.0;  // sample std, 0 for a single episode
  std::vector<env::EpisodeRecord> records;
};

Metrics compute_metrics(std::vector<env::EpisodeRecord> records);

// Seed of the i-th episode of a scenario run; the same for every scenario so runs are paired.
std::uint64_t episode_seed(std::uint64_t seed, int i);

// Runs one episode with the policy mean as the action.
env::EpisodeRecord run_episode(env::RockCaptureEnv& env, const nn::GaussianPolicy& policy,
                               std::uint64_t seed, const std::string& scenario,
                               const std::string& config_hash);

using MaterialLookup = std::function<physics::SoilMaterial(const std::string&)>;

// Throws ScenarioMismatchError if the policy does not fit the observation/action sizes and
// std::invalid_argument for the human scenario.
Metrics run_scenario(const ScenarioConfig& sc, const env::EpisodeConfig& base,
                     const physics::ExcavatorGeometry& geometry, const nn::GaussianPolicy& policy,
                     std::uint64_t seed, const std::string& config_hash = "",
                     const MaterialLookup& materials = physics::material_by_name);

// s(0) = x(0), s(t) = w*s(t-1) + (1-w)*x(t).
std::vector<double> smooth(const std::vector<double>& series, double w);

// One text block, one row per scenario.
struct ReportRow {
  Scenario scenario;
  Metrics metrics;
};
std::string format_report(const std::vector<ReportRow>& rows);

// trajectory.csv, commands.csv and tilt.csv, each with an episode column.
void export_figures(const std::vector<env::EpisodeRecord>& records,
                    const std::filesystem::path& dir);
inline constexpr const char* kTrajectoryHeader =
    "episode,step,t,rock_x,rock_z,bucket_x,bucket_z,goal_x,goal_z,delta_prox";
inline constexpr const char* kCommandsHeader =
    "episode,step,t,a_boom,a_arm,a_bucket,v_boom,v_arm,v_bucket";
inline constexpr const char* kTiltHeader = "episode,step,t,theta,phi,delta_tilt";

// Metrics store: records go to <dir>/<scenario>/<source>_<seed>_<n>.jsonl and one summary line
// per run is appended to <dir>/metrics.jsonl.
std::filesystem::path store_record(const std::filesystem::path& dir, const env::EpisodeRecord& r);
void append_summary(const std::filesystem::path& dir, Scenario s, const Metrics& m,
                    std::uint64_t seed, const std::string& config_hash);
// All records of one scenario in the store, sorted by file name.
std::vector<env::EpisodeRecord> load_records(const std::filesystem::path& dir, Scenario s);

}  // namespace rockcap::eval
