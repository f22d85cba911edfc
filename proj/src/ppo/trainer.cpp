#include "rockcap/ppo/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "rockcap/core/version.hpp"
#include "rockcap/env/record.hpp"
#include "rockcap/ppo/gae.hpp"

namespace rockcap::ppo {

using nlohmann::json;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double mean_or_nan(const std::deque<double>& d) {
  if (d.empty()) return std::nan("");
  return std::accumulate(d.begin(), d.end(), 0.0) / d.size();
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::string bits_to_string(const std::vector<bool>& v) {
  std::string s(v.size(), '0');
  for (std::size_t i = 0; i < v.size(); ++i) s[i] = v[i] ? '1' : '0';
  return s;
}

std::vector<bool> string_to_bits(const std::string& s) {
  std::vector<bool> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = s[i] == '1';
  return v;
}

std::vector<double> to_std(const nn::Vector& v) { return {v.data(), v.data() + v.size()}; }

nn::Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const nn::Vector>(v.data(), v.size());
}

}  // namespace

bool CurveRow::same_except_wall_time(const CurveRow& o) const {
  return total_steps == o.total_steps && same(mean_cumreward, o.mean_cumreward) &&
         same(success_rate, o.success_rate) && episodes == o.episodes &&
         same(policy_loss, o.policy_loss) && same(value_loss, o.value_loss) &&
         same(entropy, o.entropy) && same(approx_kl, o.approx_kl) &&
         same(clip_fraction, o.clip_fraction) && same(log_std_mean, o.log_std_mean);
}

std::string curve_header() {
  return "total_steps,mean_cumreward_100,success_rate_100,episodes,policy_loss,value_loss,"
         "entropy,approx_kl,clip_fraction,log_std_mean,wall_time";
}

std::string curve_line(const CurveRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{:.3f}", r.total_steps, r.mean_cumreward,
                     r.success_rate, r.episodes, r.policy_loss, r.value_loss, r.entropy,
                     r.approx_kl, r.clip_fraction, r.log_std_mean, r.wall_time);
}

std::vector<CurveRow> read_curve(std::istream& in) {
  std::vector<CurveRow> rows;
  std::string line;
  if (!std::getline(in, line) || line != curve_header())
    throw std::runtime_error("training curve: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) throw std::runtime_error("training curve: malformed row: " + line);
    CurveRow r;
    r.total_steps = std::stoull(cells[0]);
    r.mean_cumreward = std::stod(cells[1]);
    r.success_rate = std::stod(cells[2]);
    r.episodes = std::stoull(cells[3]);
    r.policy_loss = std::stod(cells[4]);
    r.value_loss = std::stod(cells[5]);
    r.entropy = std::stod(cells[6]);
    r.approx_kl = std::stod(cells[7]);
    r.clip_fraction = std::stod(cells[8]);
    r.log_std_mean = std::stod(cells[9]);
    r.wall_time = std::stod(cells[10]);
    rows.push_back(r);
  }
  return rows;
}

double success_rate(const std::deque<bool>& window) {
  if (window.empty()) return std::nan("");
  int n = 0;
  for (bool b : window) n += b ? 1 : 0;
  return static_cast<double>(n) / window.size();
}

Trainer::Trainer(PpoConfig config, EnvFactory factory, TrainOptions options)
    : config_(std::move(config)), factory_(std::move(factory)), options_(std::move(options)) {
  config_.validate();
  const std::uint64_t seed = options_.seed;
  for (int i = 0; i < config_.n_envs; ++i) {
    EnvSlot slot;
    slot.env = factory_(i);
    slot.noise = RandomStream::derive(seed, 100 + i);
    slot.seeds = RandomStream::derive(seed, 200 + i);
    envs_.push_back(std::move(slot));
  }
  const int obs_dim = envs_.front().env->obs_dim();
  const int act_dim = envs_.front().env->act_dim();
  policy_ = nn::GaussianPolicy(obs_dim, act_dim, config_.policy_hidden);
  value_ = nn::ValueNet(obs_dim, config_.value_hidden);
  RandomStream init_p = RandomStream::derive(seed, 1);
  RandomStream init_v = RandomStream::derive(seed, 2);
  nn::init_policy(policy_, init_p);
  nn::init_value(value_, init_v);
  policy_adam_.lr = value_adam_.lr = config_.learning_rate;
  shuffle_ = RandomStream::derive(seed, 3);
  for (EnvSlot& s : envs_) start_episode(s);
  started_ = now_seconds();
}

void Trainer::start_episode(EnvSlot& slot) {
  slot.obs = slot.env->reset(slot.seeds.next_u64());
  slot.episode_return = 0.0;
  slot.in_goal.clear();
}

CurveRow Trainer::iterate() {
  const int n_envs = config_.n_envs, n_steps = config_.n_steps;
  const int obs_dim = policy_.mean_net.input_dim();
  const int act_dim = policy_.log_std.size();
  const int total = n_envs * n_steps;

  // Storage indexed [env * n_steps + t].
  Buffer buf;
  buf.obs.resize(obs_dim, total);
  buf.actions.resize(act_dim, total);
  buf.log_prob.assign(total, 0.0);
  std::vector<double> rewards(total), values(total), next_values(total);
  std::vector<bool> terminal(total), boundary(total);
  const nn::Vector ls = policy_.clamped_log_std();

  nn::Matrix obs_batch(obs_dim, n_envs);
  for (int t = 0; t < n_steps; ++t) {
    for (int e = 0; e < n_envs; ++e) obs_batch.col(e) = envs_[e].obs;
    const nn::Matrix mu = policy_.mean_net.forward(obs_batch);
    const nn::Matrix v = value_.net.forward(obs_batch);
    for (int e = 0; e < n_envs; ++e) {
      EnvSlot& slot = envs_[e];
      const int k = e * n_steps + t;
      nn::Vector a(act_dim);
      for (int i = 0; i < act_dim; ++i) a[i] = mu(i, e) + std::exp(ls[i]) * slot.noise.normal();
      buf.obs.col(k) = slot.obs;
      buf.actions.col(k) = a;
      buf.log_prob[k] = nn::gaussian_log_prob(a, mu.col(e), ls);
      values[k] = v(0, e);

      const EnvStep s = slot.env->step(a);
      rewards[k] = s.reward;
      terminal[k] = s.terminal;
      boundary[k] = s.boundary;
      slot.episode_return += s.reward;
      slot.in_goal.push_back(s.in_goal);
      ++total_steps_;
      if (s.boundary) {
        next_values[k] = s.terminal ? 0.0 : value_.value(s.obs);
        returns_window_.push_back(slot.episode_return);
        success_window_.push_back(env::held_at_goal(slot.in_goal));
        while (static_cast<int>(returns_window_.size()) > config_.metric_window) {
          returns_window_.pop_front();
          success_window_.pop_front();
        }
        ++episodes_;
        start_episode(slot);
      } else {
        slot.obs = s.obs;
      }
    }
  }
  for (int e = 0; e < n_envs; ++e) {
    const double last = value_.value(envs_[e].obs);
    for (int t = 0; t < n_steps; ++t) {
      const int k = e * n_steps + t;
      if (!boundary[k]) next_values[k] = t + 1 < n_steps ? values[k + 1] : last;
    }
  }

  buf.advantages.assign(total, 0.0);
  buf.returns.assign(total, 0.0);
  for (int e = 0; e < n_envs; ++e) {
    const auto first = e * n_steps;
    auto slice = [&](const auto& v) {
      return std::vector<typename std::decay_t<decltype(v)>::value_type>(
          v.begin() + first, v.begin() + first + n_steps);
    };
    const GaeResult g = compute_gae(slice(rewards), slice(values), slice(next_values),
                                    slice(terminal), slice(boundary), config_.gamma,
                                    config_.gae_lambda);
    std::copy(g.advantages.begin(), g.advantages.end(), buf.advantages.begin() + first);
    std::copy(g.returns.begin(), g.returns.end(), buf.returns.begin() + first);
  }

  const MinibatchLoss loss = update(buf);
  ++iteration_;

  CurveRow row;
  row.total_steps = total_steps_;
  row.mean_cumreward = mean_or_nan(returns_window_);
  row.success_rate = success_rate(success_window_);
  row.episodes = episodes_;
  row.policy_loss = loss.policy_loss;
  row.value_loss = loss.value_loss;
  row.entropy = loss.entropy;
  row.approx_kl = loss.approx_kl;
  row.clip_fraction = loss.clip_fraction;
  row.log_std_mean = policy_.log_std.mean();
  row.wall_time = wall_offset_ + now_seconds() - started_;
  curve_.push_back(row);
  write_outputs(row, false);
  if (options_.on_rollout) options_.on_rollout(row);
  return row;
}

MinibatchLoss Trainer::update(const Buffer& buf) {
  const int total = buf.obs.cols();
  const int mb = config_.minibatch_size;
  if (total % mb != 0) throw std::invalid_argument("minibatch size must divide the buffer");
  std::vector<int> idx(total);
  MinibatchLoss sum;
  int count = 0;
  nn::Vector pgrad, vgrad;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = total - 1; i > 0; --i)
      std::swap(idx[i], idx[shuffle_.uniform_index(static_cast<std::uint64_t>(i) + 1)]);
    for (int start = 0; start < total; start += mb) {
      Minibatch b;
      b.obs.resize(buf.obs.rows(), mb);
      b.actions.resize(buf.actions.rows(), mb);
      b.old_log_prob.resize(mb);
      b.advantages.resize(mb);
      b.returns.resize(mb);
      for (int j = 0; j < mb; ++j) {
        const int k = idx[start + j];
        b.obs.col(j) = buf.obs.col(k);
        b.actions.col(j) = buf.actions.col(k);
        b.old_log_prob[j] = buf.log_prob[k];
        b.advantages[j] = buf.advantages[k];
        b.returns[j] = buf.returns[k];
      }
      normalize_advantages(b.advantages);
      const MinibatchLoss l = ppo_loss_and_grads(policy_, value_, b, config_.clip_range,
                                                 config_.vf_coef, config_.entropy_coef, pgrad,
                                                 vgrad);
      if (!std::isfinite(l.total) || !pgrad.allFinite() || !vgrad.allFinite()) {
        std::string where = "(no output directory)";
        if (!options_.out_dir.empty()) {
          const auto path = options_.out_dir / "nan_minibatch.json";
          json dump = {{"iteration", iteration_},
                       {"epoch", epoch},
                       {"minibatch_start", start},
                       {"loss", {l.policy_loss, l.value_loss, l.entropy}},
                       {"old_log_prob", b.old_log_prob},
                       {"advantages", b.advantages},
                       {"returns", b.returns},
                       {"log_std", to_std(policy_.log_std)}};
          json obs = json::array(), act = json::array();
          for (int j = 0; j < mb; ++j) {
            obs.push_back(to_std(b.obs.col(j)));
            act.push_back(to_std(b.actions.col(j)));
          }
          dump["obs"] = obs;
          dump["actions"] = act;
          std::ofstream(path) << dump.dump(1) << '\n';
          where = path.string();
        }
        throw std::runtime_error(fmt::format(
            "non-finite loss at iteration {} epoch {} minibatch {}; minibatch dumped to {}",
            iteration_, epoch, start / mb, where));
      }
      nn::clip_grad_norm({&pgrad, &vgrad}, config_.max_grad_norm);
      nn::Vector pp = policy_.flat(), vp = value_.net.flat();
      nn::adam_step(policy_adam_, pp, pgrad);
      nn::adam_step(value_adam_, vp, vgrad);
      policy_.set_flat(pp);
      value_.net.set_flat(vp);
      sum.policy_loss += l.policy_loss;
      sum.value_loss += l.value_loss;
      sum.entropy += l.entropy;
      sum.total += l.total;
      sum.approx_kl += l.approx_kl;
      sum.clip_fraction += l.clip_fraction;
      ++count;
    }
  }
  if (count > 0) {
    sum.policy_loss /= count;
    sum.value_loss /= count;
    sum.entropy /= count;
    sum.total /= count;
    sum.approx_kl /= count;
    sum.clip_fraction /= count;
  }
  return sum;
}

void Trainer::run() {
  while (iteration_ < config_.iterations()) iterate();
  if (!options_.out_dir.empty() && !curve_.empty()) write_outputs(curve_.back(), true);
}

json Trainer::save_state() const {
  json envs = json::array();
  for (const EnvSlot& s : envs_)
    envs.push_back({{"env", s.env->save_state()},
                    {"obs", to_std(s.obs)},
                    {"noise", s.noise.serialize()},
                    {"seeds", s.seeds.serialize()},
                    {"episode_return", s.episode_return},
                    {"in_goal", bits_to_string(s.in_goal)}});
  json curve = json::array();
  for (const CurveRow& r : curve_)
    curve.push_back({r.total_steps, r.mean_cumreward, r.success_rate, r.episodes, r.policy_loss,
                     r.value_loss, r.entropy, r.approx_kl, r.clip_fraction, r.log_std_mean,
                     r.wall_time});
  std::vector<int> succ(success_window_.begin(), success_window_.end());
  return {{"iteration", iteration_},
          {"total_steps", total_steps_},
          {"episodes", episodes_},
          {"envs", envs},
          {"shuffle", shuffle_.serialize()},
          {"returns_window", std::vector<double>(returns_window_.begin(), returns_window_.end())},
          {"success_window", succ},
          {"curve", curve},
          {"ppo_config", ppo_config_to_json(config_)}};
}

void Trainer::load_state(const json& j) {
  iteration_ = j.at("iteration").get<int>();
  total_steps_ = j.at("total_steps").get<std::uint64_t>();
  episodes_ = j.at("episodes").get<std::uint64_t>();
  const json& envs = j.at("envs");
  if (envs.size() != envs_.size())
    throw std::invalid_argument("checkpoint was written with a different n_envs");
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    EnvSlot& s = envs_[i];
    const json& e = envs[i];
    s.env->load_state(e.at("env"));
    s.obs = from_std(e.at("obs").get<std::vector<double>>());
    s.noise.deserialize(e.at("noise").get<std::string>());
    s.seeds.deserialize(e.at("seeds").get<std::string>());
    s.episode_return = e.at("episode_return").get<double>();
    s.in_goal = string_to_bits(e.at("in_goal").get<std::string>());
  }
  shuffle_.deserialize(j.at("shuffle").get<std::string>());
  const auto rw = j.at("returns_window").get<std::vector<double>>();
  returns_window_.assign(rw.begin(), rw.end());
  success_window_.clear();
  for (int b : j.at("success_window").get<std::vector<int>>()) success_window_.push_back(b != 0);
  curve_.clear();
  for (const json& r : j.at("curve")) {
    CurveRow row;
    row.total_steps = r[0].get<std::uint64_t>();
    auto num = [](const json& x) { return x.is_null() ? std::nan("") : x.get<double>(); };
    row.mean_cumreward = num(r[1]);
    row.success_rate = num(r[2]);
    row.episodes = r[3].get<std::uint64_t>();
    row.policy_loss = num(r[4]);
    row.value_loss = num(r[5]);
    row.entropy = num(r[6]);
    row.approx_kl = num(r[7]);
    row.clip_fraction = num(r[8]);
    row.log_std_mean = num(r[9]);
    row.wall_time = num(r[10]);
    curve_.push_back(row);
  }
  wall_offset_ = curve_.empty() ? 0.0 : curve_.back().wall_time;
  started_ = now_seconds();
}

nn::Checkpoint Trainer::checkpoint() const {
  nn::Checkpoint c;
  c.policy = policy_;
  c.value = value_;
  c.policy_adam = policy_adam_;
  c.value_adam = value_adam_;
  c.metadata.total_steps = total_steps_;
  c.metadata.seed = options_.seed;
  c.metadata.config_hash = options_.config_hash;
  c.metadata.version = std::string(build_version());
  c.metadata.extra = save_state().dump();
  return c;
}

void Trainer::resume(const nn::Checkpoint& c) {
  nn::Checkpoint slot;
  slot.policy = policy_;
  slot.value = value_;
  nn::check_same_shapes(c, slot);
  if (c.metadata.seed != options_.seed)
    throw std::invalid_argument(
        fmt::format("checkpoint seed {} differs from the requested seed {}", c.metadata.seed,
                    options_.seed));
  policy_ = c.policy;
  value_ = c.value;
  policy_adam_ = c.policy_adam;
  value_adam_ = c.value_adam;
  if (c.metadata.extra.empty()) throw std::invalid_argument("checkpoint has no trainer state");
  load_state(json::parse(c.metadata.extra));
}

void Trainer::write_outputs(const CurveRow& row, bool final) {
  if (options_.out_dir.empty()) return;
  std::filesystem::create_directories(options_.out_dir);
  {
    std::ofstream out(options_.out_dir / "curve.csv");
    out << curve_header() << '\n';
    for (const CurveRow& r : curve_) out << curve_line(r) << '\n';
  }
  const bool periodic =
      config_.checkpoint_every > 0 && iteration_ % config_.checkpoint_every == 0;
  if (periodic && !final)
    nn::save_checkpoint(options_.out_dir / fmt::format("checkpoint_{:09d}.bin", row.total_steps),
                        checkpoint());
  if (final) nn::save_checkpoint(options_.out_dir / "final.bin", checkpoint());
}

}  // namespace rockcap::ppo
