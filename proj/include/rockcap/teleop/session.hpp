#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <vector>

#include "rockcap/env/record.hpp"
#include "rockcap/teleop/protocol.hpp"

namespace rockcap::teleop {

enum class Mode { practice, evaluation };
std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);
int default_trials(Mode m);  // 100 practice, 10 evaluation

struct SessionConfig {
  Mode mode = Mode::practice;
  int trials = 100;
  // Per-trial world seeds; when shorter than `trials` the rest come from trial_seed().
  std::vector<std::uint64_t> seeds;
  // One physics step per received control message instead of the 60 Hz clock.
  bool lockstep = false;
};

SessionConfig session_config(Mode m);
// Pre-committed seed of trial i: identical for every participant. Practice and evaluation draw
// from disjoint streams.
std::uint64_t trial_seed(Mode m, int i);
// Whitespace separated unsigned integers.
std::vector<std::uint64_t> read_seed_file(const std::filesystem::path& path);

// One operator's sequence of trials over a single environment. Not thread-safe; the server drives
// it from its physics thread.
class TeleopSession {
 public:
  TeleopSession(SessionConfig config, env::EpisodeConfig episode,
                physics::ExcavatorGeometry geometry, physics::SoilMaterial material,
                std::string config_hash = "");

  Hello hello() const;
  const SessionConfig& config() const { return config_; }
  int trials_done() const { return static_cast<int>(records_.size()); }
  int trials_remaining() const { return config_.trials - trials_done(); }
  bool finished() const { return trials_remaining() <= 0; }
  bool trial_active() const { return active_; }

  // Resets the env with the next trial's seed. Throws std::logic_error if a trial is running or
  // the session is over.
  StateFrame start_trial();
  // One physics step with the given keys. Returns the result when the trial ends.
  std::optional<TrialResult> step(const KeyStates& keys);
  // Discards the running trial (client gone); it is not recorded and will be repeated.
  void abort_trial();

  StateFrame frame();
  SessionEnd summary() const;
  // Completed trials, tagged "human".
  const std::vector<env::EpisodeRecord>& records() const { return records_; }
  const env::RockCaptureEnv& environment() const { return env_; }

 private:
  SessionConfig config_;
  std::string config_hash_;
  env::RockCaptureEnv env_;
  env::EpisodeRecord current_;
  std::vector<env::EpisodeRecord> records_;
  bool active_ = false;
  double cumulative_ = 0.0;
  bool last_prox_ = false, last_tilt_ = false, last_goal_ = false;
  std::uint64_t next_frame_id_ = 0;
};

// Single-producer/single-consumer latest-value slot. put() overwrites; readers see the newest.
template <class T>
class LatestMailbox {
 public:
  void put(const T& v) {
    {
      std::lock_guard lock(mutex_);
      value_ = v;
      ++sequence_;
    }
    cv_.notify_one();
  }
  // Newest value and its sequence number (0 if nothing was ever put).
  std::pair<std::optional<T>, std::uint64_t> latest() const {
    std::lock_guard lock(mutex_);
    return {value_, sequence_};
  }
  // Blocks until the sequence passes `seen` or `pred()` holds, or the timeout expires.
  template <class Rep, class Period, class Pred>
  std::pair<std::optional<T>, std::uint64_t> wait_newer(std::uint64_t seen,
                                                        std::chrono::duration<Rep, Period> timeout,
                                                        Pred pred) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] { return sequence_ > seen || pred(); });
    return {value_, sequence_};
  }
  void notify() { cv_.notify_all(); }

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::optional<T> value_;
  std::uint64_t sequence_ = 0;
};

}  // namespace rockcap::teleop
