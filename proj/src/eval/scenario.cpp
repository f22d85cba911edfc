#include "rockcap/eval/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "rockcap/core/version.hpp"

namespace rockcap::eval {

namespace fs = std::filesystem;
using physics::RockFamily;

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::training_condition: return "training_condition";
    case Scenario::unseen_rocks: return "unseen_rocks";
    case Scenario::unseen_material: return "unseen_material";
    case Scenario::human: return "human";
  }
  return "?";
}

Scenario scenario_from_string(std::string_view s) {
  std::string n(s);
  std::replace(n.begin(), n.end(), '-', '_');
  for (Scenario c : {Scenario::training_condition, Scenario::unseen_rocks,
                     Scenario::unseen_material, Scenario::human})
    if (n == to_string(c)) return c;
  throw std::invalid_argument(fmt::format("unknown scenario '{}'", s));
}

std::vector<Scenario> agent_scenarios() {
  return {Scenario::training_condition, Scenario::unseen_rocks, Scenario::unseen_material};
}

std::optional<double> reference_success_rate(Scenario s) {
  switch (s) {
    case Scenario::training_condition: return 0.9;
    case Scenario::unseen_rocks: return 0.8;
    case Scenario::unseen_material: return 0.7;
    case Scenario::human: return std::nullopt;
  }
  return std::nullopt;
}

ScenarioConfig scenario_config(Scenario s, int episodes) {
  ScenarioConfig c;
  c.name = s;
  c.episodes = episodes;
  c.families = {RockFamily::I, RockFamily::II};
  c.material = "dirt";
  if (s == Scenario::unseen_rocks) c.families = {RockFamily::III, RockFamily::IV};
  if (s == Scenario::unseen_material) c.material = "sand";
  return c;
}

env::EpisodeConfig apply_scenario(const ScenarioConfig& sc, env::EpisodeConfig base) {
  base.randomization.families = sc.families;
  base.material = sc.material;
  base.validate();
  return base;
}

Metrics compute_metrics(std::vector<env::EpisodeRecord> records) {
  Metrics m;
  m.episodes = static_cast<int>(records.size());
  std::vector<double> returns;
  for (const env::EpisodeRecord& r : records) {
    m.successes += r.success() ? 1 : 0;
    returns.push_back(r.cumulative_reward());
  }
  if (m.episodes > 0) {
    m.success_rate = static_cast<double>(m.successes) / m.episodes;
    double sum = 0.0;
    for (double x : returns) sum += x;
    m.cumreward_mean = sum / m.episodes;
    if (m.episodes > 1) {
      double ss = 0.0;
      for (double x : returns) ss += (x - m.cumreward_mean) * (x - m.cumreward_mean);
      m.cumreward_std = std::sqrt(ss / (m.episodes - 1));
    }
  }
  m.records = std::move(records);
  return m;
}

std::uint64_t episode_seed(std::uint64_t seed, int i) {
  return RandomStream::derive(seed, 1000 + static_cast<std::uint64_t>(i)).next_u64();
}

env::EpisodeRecord run_episode(env::RockCaptureEnv& e, const nn::GaussianPolicy& policy,
                               std::uint64_t seed, const std::string& scenario,
                               const std::string& config_hash) {
  env::Observation obs = e.reset(seed);
  env::EpisodeRecord rec = env::begin_record(e, "agent", scenario, config_hash);
  while (true) {
    const nn::Vector mu = policy.mean(Eigen::Map<const nn::Vector>(obs.data(), env::kObsDim));
    env::Action a;
    for (int i = 0; i < env::kActDim; ++i) a[i] = mu[i];
    const env::StepResult r = e.step(a);
    rec.steps.push_back(env::make_step_record(e, r));
    obs = r.obs;
    if (r.done()) break;
  }
  return rec;
}

Metrics run_scenario(const ScenarioConfig& sc, const env::EpisodeConfig& base,
                     const physics::ExcavatorGeometry& geometry, const nn::GaussianPolicy& policy,
                     std::uint64_t seed, const std::string& config_hash,
                     const MaterialLookup& materials) {
  if (sc.name == Scenario::human)
    throw std::invalid_argument("the human scenario is collected by the teleop server");
  const std::vector<int> sizes = policy.mean_net.sizes();
  if (sizes.front() != env::kObsDim || sizes.back() != env::kActDim)
    throw ScenarioMismatchError(fmt::format("policy maps {} -> {}, the task needs {} -> {}",
                                            sizes.front(), sizes.back(), env::kObsDim,
                                            env::kActDim));
  const env::EpisodeConfig cfg = apply_scenario(sc, base);
  env::RockCaptureEnv e(cfg, geometry, materials(cfg.material));
  std::vector<env::EpisodeRecord> records;
  for (int i = 0; i < sc.episodes; ++i)
    records.push_back(
        run_episode(e, policy, episode_seed(seed, i), std::string(to_string(sc.name)), config_hash));
  return compute_metrics(std::move(records));
}

std::vector<double> smooth(const std::vector<double>& series, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("smoothing weight must be in [0, 1]");
  std::vector<double> s;
  s.reserve(series.size());
  for (double x : series) s.push_back(s.empty() ? x : w * s.back() + (1.0 - w) * x);
  return s;
}

std::string format_report(const std::vector<ReportRow>& rows) {
  std::string out = fmt::format("{:<20} {:>8} {:>12} {:>26} {:>10}\n", "scenario", "episodes",
                                "success", "cumulative reward", "reference");
  for (const ReportRow& r : rows) {
    const auto ref = reference_success_rate(r.scenario);
    out += fmt::format("{:<20} {:>8} {:>12} {:>26} {:>10}\n", to_string(r.scenario),
                       r.metrics.episodes,
                       fmt::format("{}/{} {:.2f}", r.metrics.successes, r.metrics.episodes,
                                   r.metrics.success_rate),
                       fmt::format("{:.2f} +- {:.2f}", r.metrics.cumreward_mean,
                                   r.metrics.cumreward_std),
                       ref ? fmt::format("{:.1f}", *ref) : std::string("-"));
  }
  return out;
}

namespace {

std::ofstream open_csv(const fs::path& p, const char* header) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << header << '\n';
  return f;
}

}  // namespace

void export_figures(const std::vector<env::EpisodeRecord>& records, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream traj = open_csv(dir / "trajectory.csv", kTrajectoryHeader);
  std::ofstream cmd = open_csv(dir / "commands.csv", kCommandsHeader);
  std::ofstream tilt = open_csv(dir / "tilt.csv", kTiltHeader);
  using namespace env;
  for (std::size_t e = 0; e < records.size(); ++e) {
    const EpisodeRecord& r = records[e];
    const double prox = r.env_config.at("reward").at("delta_prox").get<double>();
    const double band = r.env_config.at("reward").at("delta_tilt").get<double>();
    for (std::size_t k = 0; k < r.steps.size(); ++k) {
      const StepRecord& s = r.steps[k];
      const Observation& o = s.raw_obs;
      traj << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", e, k, s.sim_time, o[kXRock], o[kZRock],
                          o[kXBucket], o[kZBucket], o[kXGoal], o[kZGoal], prox);
      cmd << fmt::format("{},{},{},{},{},{},{},{},{}\n", e, k, s.sim_time, s.action[0],
                         s.action[1], s.action[2], s.speeds[0], s.speeds[1], s.speeds[2]);
      tilt << fmt::format("{},{},{},{},{},{}\n", e, k, s.sim_time, o[kTheta], o[kPhi], band);
    }
  }
}

fs::path store_record(const fs::path& dir, const env::EpisodeRecord& r) {
  const fs::path sub = dir / (r.scenario.empty() ? std::string("unnamed") : r.scenario);
  fs::create_directories(sub);
  fs::path p;
  for (int n = 0;; ++n) {
    p = sub / fmt::format("{}_{:016x}_{:03}.jsonl", r.source, r.seed, n);
    if (!fs::exists(p)) break;
  }
  std::ofstream f(p);
  env::write_record(f, r);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return p;
}

void append_summary(const fs::path& dir, Scenario s, const Metrics& m, std::uint64_t seed,
                    const std::string& config_hash) {
  fs::create_directories(dir);
  std::ofstream f(dir / "metrics.jsonl", std::ios::app);
  const nlohmann::json j = {{"scenario", to_string(s)},
                            {"episodes", m.episodes},
                            {"successes", m.successes},
                            {"success_rate", m.success_rate},
                            {"cumreward_mean", m.cumreward_mean},
                            {"cumreward_std", m.cumreward_std},
                            {"seed", seed},
                            {"config_hash", config_hash},
                            {"version", build_version()}};
  f << j.dump() << '\n';
}

std::vector<env::EpisodeRecord> load_records(const fs::path& dir, Scenario s) {
  std::vector<fs::path> files;
  const fs::path sub = dir / std::string(to_string(s));
  if (fs::is_directory(sub))
    for (const auto& entry : fs::directory_iterator(sub))
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<env::EpisodeRecord> out;
  for (const fs::path& p : files) {
    std::ifstream f(p);
    out.push_back(env::read_record(f));
  }
  return out;
}

}  // namespace rockcap::eval
