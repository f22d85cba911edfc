#include "rockcap/env/record.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "rockcap/core/version.hpp"

namespace rockcap::env {

using nlohmann::json;

double EpisodeRecord::cumulative_reward() const {
  double s = 0.0;
  for (const StepRecord& st : steps) s += st.reward;
  return s;
}

bool EpisodeRecord::success() const {
  if (aborted) return false;
  std::vector<bool> in_goal;
  in_goal.reserve(steps.size());
  for (const StepRecord& s : steps) in_goal.push_back(s.c_goal);
  return held_at_goal(in_goal);
}

bool held_at_goal(const std::vector<bool>& in_goal, int window, int min_in_goal) {
  if (in_goal.empty()) return false;
  if (in_goal.back()) return true;
  const std::size_t n = in_goal.size();
  const std::size_t start = n > static_cast<std::size_t>(window) ? n - window : 0;
  int count = 0;
  for (std::size_t i = start; i < n; ++i) count += in_goal[i] ? 1 : 0;
  return count >= min_in_goal;
}

EpisodeRecord begin_record(const RockCaptureEnv& env, const std::string& source,
                           const std::string& scenario, const std::string& config_hash) {
  EpisodeRecord r;
  r.source = source;
  r.scenario = scenario;
  r.seed = env.seed();
  r.config_hash = config_hash;
  r.version = std::string(build_version());
  r.env_config = episode_config_to_json(env.config());
  r.geometry = physics::geometry_to_json(env.model().geometry);
  r.material = physics::material_to_json(env.model().material);
  r.goal = env.goal();
  r.rock_family = std::string(physics::to_string(env.setup().family));
  r.rock_density = env.setup().density;
  r.rock_x = env.setup().rock_x;
  r.initial_raw_obs = env.raw_observation();
  r.initial_obs = env.observation();
  return r;
}

StepRecord make_step_record(const RockCaptureEnv& env, const StepResult& r) {
  StepRecord s;
  s.sim_time = env.world().sim_time;
  s.raw_obs = r.raw_obs;
  s.obs = r.obs;
  s.action = r.action;
  s.speeds = r.commanded_speeds;
  s.reward = r.reward;
  s.reward_terms = r.info.reward_terms;
  s.c_proximity = r.info.c_proximity;
  s.c_tilting = r.info.c_tilting;
  s.c_goal = r.info.c_goal;
  s.truncated = r.truncated;
  s.terminated = r.terminated;
  return s;
}

json header_to_json(const EpisodeRecord& r) {
  return {{"type", "header"},
          {"schema", r.schema},
          {"source", r.source},
          {"scenario", r.scenario},
          {"seed", r.seed},
          {"config_hash", r.config_hash},
          {"version", r.version},
          {"env_config", r.env_config},
          {"geometry", r.geometry},
          {"material", r.material},
          {"goal", {r.goal.x, r.goal.z}},
          {"rock_family", r.rock_family},
          {"rock_density", r.rock_density},
          {"rock_x", r.rock_x},
          {"initial_raw_obs", r.initial_raw_obs},
          {"initial_obs", r.initial_obs}};
}

json step_to_json(const StepRecord& s) {
  return {{"type", "step"},
          {"sim_time", s.sim_time},
          {"raw_obs", s.raw_obs},
          {"obs", s.obs},
          {"action", s.action},
          {"speeds", s.speeds},
          {"reward", s.reward},
          {"reward_terms", s.reward_terms},
          {"c_proximity", s.c_proximity},
          {"c_tilting", s.c_tilting},
          {"c_goal", s.c_goal},
          {"truncated", s.truncated},
          {"terminated", s.terminated}};
}

StepRecord step_from_json(const json& j) {
  StepRecord s;
  s.sim_time = j.at("sim_time").get<double>();
  s.raw_obs = j.at("raw_obs").get<Observation>();
  s.obs = j.at("obs").get<Observation>();
  s.action = j.at("action").get<Action>();
  s.speeds = j.at("speeds").get<physics::Vec3>();
  s.reward = j.at("reward").get<double>();
  s.reward_terms = j.at("reward_terms").get<std::array<double, 6>>();
  s.c_proximity = j.at("c_proximity").get<bool>();
  s.c_tilting = j.at("c_tilting").get<bool>();
  s.c_goal = j.at("c_goal").get<bool>();
  s.truncated = j.at("truncated").get<bool>();
  s.terminated = j.at("terminated").get<bool>();
  return s;
}

void write_record(std::ostream& out, const EpisodeRecord& r) {
  out << header_to_json(r).dump() << '\n';
  for (const StepRecord& s : r.steps) out << step_to_json(s).dump() << '\n';
  const json summary = {{"type", "summary"},
                        {"steps", r.steps.size()},
                        {"cumulative_reward", r.cumulative_reward()},
                        {"success", r.success()},
                        {"truncated", r.truncated()},
                        {"aborted", r.aborted}};
  out << summary.dump() << '\n';
}

EpisodeRecord read_record(std::istream& in) {
  EpisodeRecord r;
  std::string line;
  bool have_header = false, have_summary = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("episode log line " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string type = j.value("type", "");
    try {
      if (type == "header") {
        r.schema = j.at("schema").get<int>();
        if (r.schema != kRecordSchema)
          throw std::runtime_error("unsupported episode log schema " + std::to_string(r.schema) +
                                   " (expected " + std::to_string(kRecordSchema) + ")");
        r.source = j.at("source").get<std::string>();
        r.scenario = j.at("scenario").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.config_hash = j.at("config_hash").get<std::string>();
        r.version = j.at("version").get<std::string>();
        r.env_config = j.at("env_config");
        r.geometry = j.at("geometry");
        r.material = j.at("material");
        r.goal = {j.at("goal")[0].get<double>(), j.at("goal")[1].get<double>()};
        r.rock_family = j.at("rock_family").get<std::string>();
        r.rock_density = j.at("rock_density").get<double>();
        r.rock_x = j.at("rock_x").get<double>();
        r.initial_raw_obs = j.at("initial_raw_obs").get<Observation>();
        r.initial_obs = j.at("initial_obs").get<Observation>();
        have_header = true;
      } else if (type == "step") {
        if (!have_header) throw std::runtime_error("step before header");
        r.steps.push_back(step_from_json(j));
      } else if (type == "summary") {
        r.aborted = j.at("aborted").get<bool>();
        have_summary = true;
        break;
      } else {
        throw std::runtime_error("unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw std::runtime_error("episode log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw std::runtime_error("episode log has no header");
  if (!have_summary) throw std::runtime_error("episode log is truncated (no summary line)");
  return r;
}

}  // namespace rockcap::env
