#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>

#include "rockcap/teleop/session.hpp"

namespace rockcap::teleop {

struct ServeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ServeOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8765;  // 0 picks a free port, reported through on_listening
  SessionConfig session;
  env::EpisodeConfig episode;
  physics::ExcavatorGeometry geometry;
  physics::SoilMaterial material;
  std::filesystem::path store_dir;  // empty: records are not written
  std::string config_hash;
  int max_sessions = 0;           // 0 serves until the process ends
  std::size_t max_queued_frames = 8;  // state frames beyond this are dropped for slow clients
  int frame_every = 3;            // physics steps per state frame (60 Hz / 3 = 20 Hz)
  std::function<void(std::uint16_t)> on_listening;
  std::function<void(const env::EpisodeRecord&)> on_record;
};

// Accepts one websocket client at a time; each connection runs one TeleopSession. Blocks until
// max_sessions sessions have ended. Throws ServeError if the port cannot be bound.
void serve(const ServeOptions& options);

// Blocking websocket client speaking the same protocol, for scripted and headless use.
class HeadlessClient {
 public:
  HeadlessClient(const std::string& host, std::uint16_t port);
  ~HeadlessClient();
  HeadlessClient(const HeadlessClient&) = delete;
  HeadlessClient& operator=(const HeadlessClient&) = delete;

  void send(const ClientMessage& m);
  void send_raw(const std::string& bytes);
  ServerMessage receive();
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rockcap::teleop
