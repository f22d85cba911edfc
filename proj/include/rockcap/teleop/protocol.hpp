#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "rockcap/env/task.hpp"

namespace rockcap::teleop {

// Wire format of every message, both directions:
//   byte 0      protocol version
//   bytes 1..4  payload length, unsigned little-endian
//   bytes 5..   UTF-8 JSON object with a "type" field
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kHeaderSize = 5;

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ProtocolVersionError : ProtocolError {
  using ProtocolError::ProtocolError;
};
struct ProtocolTruncatedError : ProtocolError {
  using ProtocolError::ProtocolError;
};

enum Key { kBoomUp, kBoomDown, kArmOut, kArmIn, kBucketOut, kBucketIn, kKeyCount };
using KeyStates = std::array<bool, kKeyCount>;

// Pure bang-bang: each joint goes to +1, -1 or 0 (both or neither key held).
env::Action keys_to_action(const KeyStates& keys);

// Client -> server.
struct ControlMessage {
  KeyStates keys{};
  double client_time = 0.0;
  bool operator==(const ControlMessage&) const = default;
};
// Client asks for the next trial.
struct StartTrial {
  bool operator==(const StartTrial&) const = default;
};
using ClientMessage = std::variant<ControlMessage, StartTrial>;

// Server -> client.
struct Hello {
  std::string mode;
  int trials = 0;
  int horizon = 0;
  bool lockstep = false;
  bool operator==(const Hello&) const = default;
};

struct StateFrame {
  std::uint64_t frame_id = 0;
  double sim_time = 0.0;
  int trial = 0;
  std::array<double, 3> joint_angles{};
  std::vector<Vec2> bucket_polygon;
  std::vector<Vec2> rock_polygon;
  Vec2 rock_com;  // logging only, never drawn
  double terrain_x0 = 0.0;
  double terrain_dx = 0.0;
  std::vector<double> terrain_heights;
  Vec2 goal;
  double delta_prox = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  double delta_tilt = 0.0;
  int step = 0;
  int horizon = 0;
  bool c_proximity = false;
  bool c_tilting = false;
  bool c_goal = false;
  double cumulative_reward = 0.0;

  bool all_finite() const;
  bool operator==(const StateFrame&) const = default;
};

struct TrialResult {
  int trial = 0;
  bool success = false;
  double cumulative_reward = 0.0;
  int steps = 0;
  int trials_remaining = 0;
  bool operator==(const TrialResult&) const = default;
};

struct SessionEnd {
  int completed = 0;
  int successes = 0;
  double success_rate = 0.0;
  bool operator==(const SessionEnd&) const = default;
};

struct ErrorFrame {
  std::string message;
  bool operator==(const ErrorFrame&) const = default;
};

using ServerMessage = std::variant<Hello, StateFrame, TrialResult, SessionEnd, ErrorFrame>;

std::string encode(const ClientMessage& m);
std::string encode(const ServerMessage& m);
// Throw ProtocolVersionError, ProtocolTruncatedError or ProtocolError.
ClientMessage decode_client(const std::string& bytes);
ServerMessage decode_server(const std::string& bytes);

// Envelope helpers, exposed for tests.
std::string frame_bytes(const nlohmann::json& payload);
nlohmann::json unframe_bytes(const std::string& bytes);

}  // namespace rockcap::teleop
