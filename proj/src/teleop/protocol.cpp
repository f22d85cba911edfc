#include "rockcap/teleop/protocol.hpp"

#include <cmath>

#include <fmt/format.h>

namespace rockcap::teleop {

using nlohmann::json;

namespace {

const char* const kKeyNames[kKeyCount] = {"boom_up",    "boom_down", "arm_out",
                                          "arm_in",     "bucket_out", "bucket_in"};

json vec_to_json(const Vec2& v) { return json::array({v.x, v.z}); }
Vec2 vec_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json poly_to_json(const std::vector<Vec2>& p) {
  json a = json::array();
  for (const Vec2& v : p) a.push_back(vec_to_json(v));
  return a;
}
std::vector<Vec2> poly_from_json(const json& j) {
  std::vector<Vec2> p;
  for (const json& v : j) p.push_back(vec_from_json(v));
  return p;
}

json to_json(const ControlMessage& m) {
  json keys = json::object();
  for (int k = 0; k < kKeyCount; ++k) keys[kKeyNames[k]] = m.keys[k];
  return {{"type", "control"}, {"keys", keys}, {"client_time", m.client_time}};
}

json to_json(const StartTrial&) { return {{"type", "start"}}; }

json to_json(const Hello& h) {
  return {{"type", "hello"},
          {"protocol", kProtocolVersion},
          {"mode", h.mode},
          {"trials", h.trials},
          {"horizon", h.horizon},
          {"lockstep", h.lockstep}};
}

json to_json(const StateFrame& f) {
  return {{"type", "state"},
          {"frame_id", f.frame_id},
          {"sim_time", f.sim_time},
          {"trial", f.trial},
          {"joint_angles", f.joint_angles},
          {"bucket_polygon", poly_to_json(f.bucket_polygon)},
          {"rock_polygon", poly_to_json(f.rock_polygon)},
          {"rock_com", {{"xz", vec_to_json(f.rock_com)}, {"displayable", false}}},
          {"terrain", {{"x0", f.terrain_x0}, {"dx", f.terrain_dx}, {"heights", f.terrain_heights}}},
          {"goal", vec_to_json(f.goal)},
          {"delta_prox", f.delta_prox},
          {"theta", f.theta},
          {"phi", f.phi},
          {"delta_tilt", f.delta_tilt},
          {"step", f.step},
          {"horizon", f.horizon},
          {"c_proximity", f.c_proximity},
          {"c_tilting", f.c_tilting},
          {"c_goal", f.c_goal},
          {"cumulative_reward", f.cumulative_reward}};
}

json to_json(const TrialResult& r) {
  return {{"type", "result"},
          {"trial", r.trial},
          {"success", r.success},
          {"cumulative_reward", r.cumulative_reward},
          {"steps", r.steps},
          {"trials_remaining", r.trials_remaining}};
}

json to_json(const SessionEnd& s) {
  return {{"type", "session_end"},
          {"completed", s.completed},
          {"successes", s.successes},
          {"success_rate", s.success_rate}};
}

json to_json(const ErrorFrame& e) { return {{"type", "error"}, {"message", e.message}}; }

template <class T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw ProtocolError(fmt::format("missing field '{}'", key));
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ProtocolError(fmt::format("field '{}': {}", key, e.what()));
  }
}

}  // namespace

env::Action keys_to_action(const KeyStates& keys) {
  env::Action a{};
  for (int j = 0; j < 3; ++j)
    a[j] = (keys[2 * j] ? 1.0 : 0.0) - (keys[2 * j + 1] ? 1.0 : 0.0);
  return a;
}

bool StateFrame::all_finite() const {
  auto fin = [](const std::vector<Vec2>& p) {
    for (const Vec2& v : p)
      if (!is_finite(v)) return false;
    return true;
  };
  for (double a : joint_angles)
    if (!std::isfinite(a)) return false;
  for (double h : terrain_heights)
    if (!std::isfinite(h)) return false;
  return fin(bucket_polygon) && fin(rock_polygon) && is_finite(rock_com) && is_finite(goal) &&
         std::isfinite(sim_time) && std::isfinite(theta) && std::isfinite(phi) &&
         std::isfinite(cumulative_reward);
}

std::string frame_bytes(const json& payload) {
  const std::string body = payload.dump();
  std::string out(kHeaderSize, '\0');
  out[0] = static_cast<char>(kProtocolVersion);
  const auto n = static_cast<std::uint32_t>(body.size());
  for (int i = 0; i < 4; ++i) out[1 + i] = static_cast<char>((n >> (8 * i)) & 0xff);
  return out + body;
}

json unframe_bytes(const std::string& bytes) {
  if (bytes.empty()) throw ProtocolTruncatedError("empty message");
  const auto version = static_cast<std::uint8_t>(bytes[0]);
  if (version != kProtocolVersion)
    throw ProtocolVersionError(
        fmt::format("protocol version {} not supported (expected {})", version, kProtocolVersion));
  if (bytes.size() < kHeaderSize) throw ProtocolTruncatedError("truncated header");
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[1 + i])) << (8 * i);
  if (bytes.size() - kHeaderSize < n)
    throw ProtocolTruncatedError(
        fmt::format("payload has {} of {} bytes", bytes.size() - kHeaderSize, n));
  if (bytes.size() - kHeaderSize > n) throw ProtocolError("trailing bytes after payload");
  json j = json::parse(bytes.begin() + kHeaderSize, bytes.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ProtocolError("payload is not a JSON object");
  return j;
}

std::string encode(const ClientMessage& m) {
  return std::visit([](const auto& v) { return frame_bytes(to_json(v)); }, m);
}

std::string encode(const ServerMessage& m) {
  return std::visit([](const auto& v) { return frame_bytes(to_json(v)); }, m);
}

ClientMessage decode_client(const std::string& bytes) {
  const json j = unframe_bytes(bytes);
  const auto type = get<std::string>(j, "type");
  if (type == "start") return StartTrial{};
  if (type == "control") {
    ControlMessage m;
    const json& keys = j.at("keys");
    if (!keys.is_object()) throw ProtocolError("field 'keys' must be an object");
    for (int k = 0; k < kKeyCount; ++k) m.keys[k] = get<bool>(keys, kKeyNames[k]);
    m.client_time = get<double>(j, "client_time");
    return m;
  }
  throw ProtocolError(fmt::format("unknown client message type '{}'", type));
}

ServerMessage decode_server(const std::string& bytes) {
  const json j = unframe_bytes(bytes);
  const auto type = get<std::string>(j, "type");
  if (type == "hello") {
    if (get<int>(j, "protocol") != kProtocolVersion) throw ProtocolVersionError("hello version");
    return Hello{get<std::string>(j, "mode"), get<int>(j, "trials"), get<int>(j, "horizon"),
                 get<bool>(j, "lockstep")};
  }
  if (type == "state") {
    StateFrame f;
    f.frame_id = get<std::uint64_t>(j, "frame_id");
    f.sim_time = get<double>(j, "sim_time");
    f.trial = get<int>(j, "trial");
    f.joint_angles = get<std::array<double, 3>>(j, "joint_angles");
    f.bucket_polygon = poly_from_json(j.at("bucket_polygon"));
    f.rock_polygon = poly_from_json(j.at("rock_polygon"));
    f.rock_com = vec_from_json(j.at("rock_com").at("xz"));
    const json& t = j.at("terrain");
    f.terrain_x0 = get<double>(t, "x0");
    f.terrain_dx = get<double>(t, "dx");
    f.terrain_heights = get<std::vector<double>>(t, "heights");
    f.goal = vec_from_json(j.at("goal"));
    f.delta_prox = get<double>(j, "delta_prox");
    f.theta = get<double>(j, "theta");
    f.phi = get<double>(j, "phi");
    f.delta_tilt = get<double>(j, "delta_tilt");
    f.step = get<int>(j, "step");
    f.horizon = get<int>(j, "horizon");
    f.c_proximity = get<bool>(j, "c_proximity");
    f.c_tilting = get<bool>(j, "c_tilting");
    f.c_goal = get<bool>(j, "c_goal");
    f.cumulative_reward = get<double>(j, "cumulative_reward");
    return f;
  }
  if (type == "result")
    return TrialResult{get<int>(j, "trial"), get<bool>(j, "success"),
                       get<double>(j, "cumulative_reward"), get<int>(j, "steps"),
                       get<int>(j, "trials_remaining")};
  if (type == "session_end")
    return SessionEnd{get<int>(j, "completed"), get<int>(j, "successes"),
                      get<double>(j, "success_rate")};
  if (type == "error") return ErrorFrame{get<std::string>(j, "message")};
  throw ProtocolError(fmt::format("unknown server message type '{}'", type));
}

}  // namespace rockcap::teleop
