#include "rockcap/cli/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rockcap/core/version.hpp"
#include "rockcap/eval/scenario.hpp"
#include "rockcap/ppo/trainer.hpp"
#include "rockcap/teleop/server.hpp"

namespace rockcap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

physics::SoilMaterial RunConfig::material(const std::string& name) const {
  if (!materials.contains(name)) throw UsageError(fmt::format("no material named '{}'", name));
  json entry = materials.at(name);
  entry["name"] = name;
  return physics::material_from_json(entry);
}

json RunConfig::to_json() const {
  return {{"geometry", physics::geometry_to_json(geometry)},
          {"materials", materials},
          {"env", env::episode_config_to_json(env)},
          {"ppo", ppo::ppo_config_to_json(ppo)}};
}

std::string RunConfig::hash() const {
  json j = to_json();
  j["ppo"].erase("total_timesteps");
  return hash_hex(fnv1a64(j.dump()));
}

namespace {

json read_json_file(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw UsageError(fmt::format("cannot open config file {}", p.string()));
  try {
    return json::parse(f, nullptr, true, true);
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("{}: {}", p.string(), e.what()));
  }
}

template <class F>
auto parse_section(const fs::path& p, F&& f) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(fmt::format("{}: {}", p.string(), e.what()));
  }
}

}  // namespace

RunConfig load_run_config(const ConfigPaths& paths) {
  RunConfig c;
  const json g = read_json_file(paths.geometry);
  c.geometry = parse_section(paths.geometry, [&] {
    auto geo = physics::geometry_from_json(g);
    geo.validate();
    return geo;
  });
  c.materials = read_json_file(paths.materials);
  if (!c.materials.is_object() || c.materials.empty())
    throw UsageError(paths.materials.string() + ": expected an object keyed by material name");
  for (auto it = c.materials.begin(); it != c.materials.end(); ++it)
    parse_section(paths.materials, [&] { return c.material(it.key()); }).validate();
  const json e = read_json_file(paths.env);
  c.env = parse_section(paths.env, [&] { return env::episode_config_from_json(e); });
  parse_section(paths.env, [&] { return c.material(c.env.material); });
  const json p = read_json_file(paths.ppo);
  c.ppo = parse_section(paths.ppo, [&] {
    auto cfg = ppo::ppo_config_from_json(p);
    cfg.validate();
    return cfg;
  });
  return c;
}

ReplayReport replay(const env::EpisodeRecord& record) {
  ReplayReport rep;
  rep.steps = static_cast<int>(record.steps.size());
  const env::EpisodeConfig cfg = env::episode_config_from_json(record.env_config);
  env::RockCaptureEnv e(cfg, physics::geometry_from_json(record.geometry),
                        physics::material_from_json(record.material));
  e.reset(record.seed);
  if (e.raw_observation() != record.initial_raw_obs || e.observation() != record.initial_obs) {
    rep.detail = "initial observation differs";
    return rep;
  }
  for (int k = 0; k < rep.steps; ++k) {
    const env::StepRecord& logged = record.steps[k];
    if (!e.active()) {
      rep.first_divergent_step = k;
      rep.detail = "episode ended earlier than logged";
      return rep;
    }
    const env::StepRecord again = env::make_step_record(e, e.step(logged.action));
    if (!(again == logged)) {
      rep.first_divergent_step = k;
      const json a = env::step_to_json(again), b = env::step_to_json(logged);
      for (auto it = a.begin(); it != a.end(); ++it)
        if (!b.contains(it.key()) || b.at(it.key()) != it.value()) {
          rep.detail = fmt::format("field '{}' differs", it.key());
          break;
        }
      return rep;
    }
  }
  if (e.active()) {
    rep.first_divergent_step = rep.steps;
    rep.detail = "logged episode stops before the episode ended";
    return rep;
  }
  rep.match = true;
  return rep;
}

namespace {

struct Common {
  fs::path config_dir;
  ConfigPaths paths;
  std::uint64_t seed = 0;
  bool print_config = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config-dir", c.config_dir,
                  "Directory holding geometry.cfg, materials.cfg, env.json and ppo.json");
  app->add_option("--geometry", c.paths.geometry, "Geometry config")->capture_default_str();
  app->add_option("--materials", c.paths.materials, "Materials config")->capture_default_str();
  app->add_option("--env", c.paths.env, "Episode config")->capture_default_str();
  app->add_option("--ppo", c.paths.ppo, "PPO config")->capture_default_str();
  app->add_option("--seed", c.seed, "Seed")->capture_default_str();
  app->add_flag("--print-config", c.print_config, "Print the resolved configuration and exit");
}

RunConfig resolve(Common& c, const CLI::App* app) {
  if (!c.config_dir.empty()) {
    if (app->get_option("--geometry")->count() == 0) c.paths.geometry = c.config_dir / "geometry.cfg";
    if (app->get_option("--materials")->count() == 0) c.paths.materials = c.config_dir / "materials.cfg";
    if (app->get_option("--env")->count() == 0) c.paths.env = c.config_dir / "env.json";
    if (app->get_option("--ppo")->count() == 0) c.paths.ppo = c.config_dir / "ppo.json";
  }
  return load_run_config(c.paths);
}

void print_config(std::ostream& out, const RunConfig& rc, std::uint64_t seed) {
  json j = rc.to_json();
  j["seed"] = seed;
  j["config_hash"] = rc.hash();
  j["version"] = build_version();
  out << j.dump(2) << '\n';
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p);
  f << s;
  if (!f) throw std::runtime_error("cannot write " + p.string());
}

nn::Checkpoint read_checkpoint(const fs::path& p) {
  if (!fs::exists(p)) throw UsageError(fmt::format("checkpoint {} does not exist", p.string()));
  return nn::load_checkpoint(p);
}

int cmd_train(Common& c, const CLI::App* app, std::optional<std::uint64_t> steps,
              const fs::path& out_dir, const fs::path& resume, std::ostream& out) {
  RunConfig rc = resolve(c, app);
  if (steps) rc.ppo.total_timesteps = *steps;
  if (c.print_config) {
    print_config(out, rc, c.seed);
    return kOk;
  }
  const std::string hash = rc.hash();
  fs::create_directories(out_dir);
  json run = rc.to_json();
  run["seed"] = c.seed;
  run["config_hash"] = hash;
  run["version"] = build_version();
  write_text(out_dir / "run.json", run.dump(2) + "\n");

  ppo::TrainOptions o;
  o.seed = c.seed;
  o.out_dir = out_dir;
  o.config_hash = hash;
  o.on_rollout = [&](const ppo::CurveRow& r) {
    out << fmt::format("steps {:>9}  return {:>10.3f}  success {:.2f}  episodes {}\n",
                       r.total_steps, r.mean_cumreward, r.success_rate, r.episodes);
  };
  ppo::Trainer t(rc.ppo, ppo::rock_env_factory(rc.env, rc.geometry, rc.material(rc.env.material)), o);
  if (!resume.empty()) {
    const nn::Checkpoint ck = read_checkpoint(resume);
    if (ck.metadata.config_hash != hash)
      throw UsageError(fmt::format("checkpoint was written with config {} but this run is {}",
                                   ck.metadata.config_hash, hash));
    t.resume(ck);
  }
  t.run();

  // One deterministic episode with the final policy, as a replayable log.
  env::RockCaptureEnv e(rc.env, rc.geometry, rc.material(rc.env.material));
  const env::EpisodeRecord rec =
      eval::run_episode(e, t.policy(), eval::episode_seed(c.seed, 0), "train", hash);
  std::ofstream f(out_dir / "final_episode.jsonl");
  env::write_record(f, rec);
  out << fmt::format("wrote {}\n", (out_dir / "final.bin").string());
  return kOk;
}

int cmd_eval(Common& c, const CLI::App* app, const std::string& scenario, int episodes,
             const fs::path& checkpoint, const fs::path& out_dir, fs::path store, bool export_csv,
             std::ostream& out) {
  std::vector<eval::Scenario> scenarios;
  try {
    if (scenario == "all")
      scenarios = eval::agent_scenarios();
    else
      scenarios = {eval::scenario_from_string(scenario)};
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (episodes <= 0) throw UsageError("--episodes must be positive");
  const RunConfig rc = resolve(c, app);
  if (c.print_config) {
    print_config(out, rc, c.seed);
    return kOk;
  }
  const bool agent = scenarios.front() != eval::Scenario::human;
  if (agent && checkpoint.empty()) throw UsageError("--checkpoint is required for agent scenarios");
  if (store.empty()) store = out_dir / "store";
  const std::string hash = rc.hash();

  nn::GaussianPolicy policy;
  if (agent) policy = read_checkpoint(checkpoint).policy;
  std::vector<eval::ReportRow> rows;
  for (eval::Scenario s : scenarios) {
    eval::Metrics m;
    if (s == eval::Scenario::human) {
      m = eval::compute_metrics(eval::load_records(store, s));
      if (m.episodes == 0)
        throw std::runtime_error(fmt::format("no human records in {}", store.string()));
    } else {
      eval::ScenarioConfig sc = eval::scenario_config(s, episodes);
      sc.checkpoint = checkpoint;
      m = eval::run_scenario(sc, rc.env, rc.geometry, policy, c.seed, hash,
                             [&](const std::string& n) { return rc.material(n); });
      for (const env::EpisodeRecord& r : m.records) eval::store_record(store, r);
      eval::append_summary(store, s, m, c.seed, hash);
    }
    if (export_csv) eval::export_figures(m.records, out_dir / std::string(eval::to_string(s)));
    rows.push_back({s, std::move(m)});
  }
  const std::string report = eval::format_report(rows);
  fs::create_directories(out_dir);
  write_text(out_dir / "report.txt",
             fmt::format("# config {} seed {} version {}\n{}", hash, c.seed, build_version(), report));
  out << report;
  return kOk;
}

int cmd_replay(const fs::path& log, std::ostream& out) {
  std::ifstream f(log);
  if (!f) throw UsageError(fmt::format("cannot open log {}", log.string()));
  const env::EpisodeRecord rec = env::read_record(f);
  const ReplayReport rep = replay(rec);
  if (rep.match) {
    out << fmt::format("match: {} steps reproduced bitwise (seed {}, config {}, version {})\n",
                       rep.steps, rec.seed, rec.config_hash, rec.version);
    return kOk;
  }
  out << fmt::format("mismatch at step {}: {}\n", rep.first_divergent_step, rep.detail);
  return kFailure;
}

int cmd_serve(Common& c, const CLI::App* app, std::uint16_t port, const std::string& address,
              const std::string& mode, std::optional<int> trials, const fs::path& seed_file,
              const fs::path& store, bool lockstep, int max_sessions, std::ostream& out) {
  teleop::Mode m;
  try {
    m = teleop::mode_from_string(mode);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const RunConfig rc = resolve(c, app);
  if (c.print_config) {
    print_config(out, rc, c.seed);
    return kOk;
  }
  teleop::ServeOptions o;
  o.address = address;
  o.port = port;
  o.session = teleop::session_config(m);
  if (trials) o.session.trials = *trials;
  if (!seed_file.empty()) {
    try {
      o.session.seeds = teleop::read_seed_file(seed_file);
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
  }
  o.session.lockstep = lockstep;
  o.episode = rc.env;
  o.episode.material = "dirt";
  o.episode.randomization.families = {physics::RockFamily::I, physics::RockFamily::II};
  o.geometry = rc.geometry;
  o.material = rc.material("dirt");
  o.store_dir = store;
  o.config_hash = rc.hash();
  o.max_sessions = max_sessions;
  o.on_listening = [&](std::uint16_t p) {
    out << fmt::format("listening on ws://{}:{} ({} mode, {} trials)\n", address, p, mode,
                       o.session.trials)
        << std::flush;
  };
  teleop::serve(o);
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Planar excavator rock-capturing workbench"};
  app.set_version_flag("--version", std::string(build_version()));
  app.require_subcommand(1);

  Common train_c, eval_c, serve_c;

  auto* train = app.add_subcommand("train", "Train a PPO agent");
  add_common(train, train_c);
  std::optional<std::uint64_t> steps;
  fs::path train_out = "runs/train", resume;
  train->add_option("--steps", steps, "Total environment steps (overrides the PPO config)");
  train->add_option("--out", train_out, "Output directory")->capture_default_str();
  train->add_option("--resume", resume, "Checkpoint to continue from");

  auto* evaluate = app.add_subcommand("eval", "Run evaluation scenarios");
  add_common(evaluate, eval_c);
  std::string scenario = "all";
  int episodes = 10;
  fs::path checkpoint, eval_out = "runs/eval", eval_store;
  bool no_export = false;
  evaluate->add_option("--scenario", scenario,
                       "training-condition | unseen-rocks | unseen-material | human | all")
      ->capture_default_str();
  evaluate->add_option("--episodes", episodes, "Episodes per scenario")->capture_default_str();
  evaluate->add_option("--checkpoint", checkpoint, "Policy checkpoint");
  evaluate->add_option("--out", eval_out, "Output directory")->capture_default_str();
  evaluate->add_option("--store", eval_store, "Metrics store (default <out>/store)");
  evaluate->add_flag("--no-export", no_export, "Skip the CSV exports");

  auto* rep = app.add_subcommand("replay", "Re-simulate a logged episode and compare bitwise");
  fs::path log;
  rep->add_option("log", log, "Episode log (.jsonl)")->required();

  auto* serve = app.add_subcommand("serve", "Run the teleoperation server");
  add_common(serve, serve_c);
  std::uint16_t port = 8765;
  std::string address = "127.0.0.1", mode = "practice";
  std::optional<int> trials;
  fs::path seed_file, serve_store = "runs/store";
  bool lockstep = false;
  int max_sessions = 0;
  serve->add_option("--port", port, "TCP port")->capture_default_str();
  serve->add_option("--address", address, "Bind address")->capture_default_str();
  serve->add_option("--mode", mode, "practice | evaluation")->capture_default_str();
  serve->add_option("--trials", trials, "Trials per session (default 100 practice, 10 evaluation)");
  serve->add_option("--seed-file", seed_file, "Per-trial world seeds");
  serve->add_option("--store", serve_store, "Metrics store for human records")->capture_default_str();
  serve->add_flag("--lockstep", lockstep, "Step physics once per control message");
  serve->add_option("--max-sessions", max_sessions, "Exit after this many sessions (0: never)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train) return cmd_train(train_c, train, steps, train_out, resume, out);
    if (*evaluate)
      return cmd_eval(eval_c, evaluate, scenario, episodes, checkpoint, eval_out, eval_store,
                      !no_export, out);
    if (*rep) return cmd_replay(log, out);
    if (*serve)
      return cmd_serve(serve_c, serve, port, address, mode, trials, seed_file, serve_store,
                       lockstep, max_sessions, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace rockcap::cli
