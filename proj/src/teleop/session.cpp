#include "rockcap/teleop/session.hpp"

#include <fstream>

#include <fmt/format.h>

namespace rockcap::teleop {

namespace ph = physics;

std::string_view to_string(Mode m) { return m == Mode::practice ? "practice" : "evaluation"; }

Mode mode_from_string(std::string_view s) {
  if (s == "practice") return Mode::practice;
  if (s == "evaluation") return Mode::evaluation;
  throw std::invalid_argument(fmt::format("unknown mode '{}'", s));
}

int default_trials(Mode m) { return m == Mode::practice ? 100 : 10; }

SessionConfig session_config(Mode m) {
  SessionConfig c;
  c.mode = m;
  c.trials = default_trials(m);
  return c;
}

std::uint64_t trial_seed(Mode m, int i) {
  const std::uint64_t base = m == Mode::evaluation ? 0x6576616cULL : 0x70726163ULL;
  return RandomStream::derive(base, static_cast<std::uint64_t>(i)).next_u64();
}

std::vector<std::uint64_t> read_seed_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open seed file " + path.string());
  std::vector<std::uint64_t> seeds;
  std::string tok;
  while (f >> tok) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || tok.front() == '-')
      throw std::runtime_error(fmt::format("{}: '{}' is not a seed", path.string(), tok));
    seeds.push_back(v);
  }
  return seeds;
}

TeleopSession::TeleopSession(SessionConfig config, env::EpisodeConfig episode,
                             ph::ExcavatorGeometry geometry, ph::SoilMaterial material,
                             std::string config_hash)
    : config_(std::move(config)),
      config_hash_(std::move(config_hash)),
      env_(std::move(episode), std::move(geometry), std::move(material)) {
  if (config_.trials <= 0) throw std::invalid_argument("a session needs at least one trial");
}

Hello TeleopSession::hello() const {
  return {std::string(to_string(config_.mode)), config_.trials, env_.config().horizon,
          config_.lockstep};
}

StateFrame TeleopSession::start_trial() {
  if (active_) throw std::logic_error("trial already running");
  if (finished()) throw std::logic_error("session is over");
  const int i = trials_done();
  const std::uint64_t seed = i < static_cast<int>(config_.seeds.size())
                                 ? config_.seeds[i]
                                 : trial_seed(config_.mode, i);
  env_.reset(seed);
  current_ = env::begin_record(env_, "human", "human", config_hash_);
  cumulative_ = 0.0;
  last_prox_ = last_tilt_ = last_goal_ = false;
  active_ = true;
  return frame();
}

std::optional<TrialResult> TeleopSession::step(const KeyStates& keys) {
  if (!active_) throw std::logic_error("no trial running");
  const env::StepResult r = env_.step(keys_to_action(keys));
  current_.steps.push_back(env::make_step_record(env_, r));
  cumulative_ += r.reward;
  last_prox_ = r.info.c_proximity;
  last_tilt_ = r.info.c_tilting;
  last_goal_ = r.info.c_goal;
  if (!r.done()) return std::nullopt;
  active_ = false;
  records_.push_back(std::move(current_));
  current_ = {};
  const env::EpisodeRecord& rec = records_.back();
  return TrialResult{trials_done() - 1, rec.success(), rec.cumulative_reward(),
                     static_cast<int>(rec.steps.size()), trials_remaining()};
}

void TeleopSession::abort_trial() {
  active_ = false;
  current_ = {};
}

StateFrame TeleopSession::frame() {
  const ph::WorldState& w = env_.world();
  const ph::WorldModel& m = env_.model();
  const ph::KinematicPose pose = ph::forward_kinematics(m.geometry, w.actuator_ext);
  StateFrame f;
  f.frame_id = next_frame_id_++;
  f.sim_time = w.sim_time;
  f.trial = trials_done();
  f.joint_angles = pose.joint_angles;
  f.bucket_polygon = pose.bucket_polygon_world;
  f.rock_polygon = ph::rock_polygon_world(w, m.rock);
  f.rock_com = {w.rock_pose.x, w.rock_pose.z};
  // Every fifth terrain cell is plenty for drawing.
  constexpr std::size_t stride = 5;
  f.terrain_x0 = w.terrain.x_origin;
  f.terrain_dx = w.terrain.cell_size * stride;
  for (std::size_t i = 0; i < w.terrain.size(); i += stride) f.terrain_heights.push_back(w.terrain.heights[i]);
  f.goal = env_.goal();
  f.delta_prox = env_.config().weights.delta_prox;
  f.theta = w.cabin_pitch;
  f.phi = w.cabin_roll;
  f.delta_tilt = env_.config().weights.delta_tilt;
  f.step = env_.step_count();
  f.horizon = env_.config().horizon;
  f.c_proximity = last_prox_;
  f.c_tilting = last_tilt_;
  f.c_goal = last_goal_;
  f.cumulative_reward = cumulative_;
  return f;
}

SessionEnd TeleopSession::summary() const {
  SessionEnd s;
  s.completed = trials_done();
  for (const env::EpisodeRecord& r : records_) s.successes += r.success() ? 1 : 0;
  s.success_rate = s.completed > 0 ? static_cast<double>(s.successes) / s.completed : 0.0;
  return s;
}

}  // namespace rockcap::teleop
