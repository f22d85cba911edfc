#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "rockcap/env/record.hpp"
#include "rockcap/ppo/config.hpp"

namespace rockcap::cli {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2 };

// Bad flags, missing or invalid config files.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigPaths {
  std::filesystem::path geometry = "config/geometry.cfg";
  std::filesystem::path materials = "config/materials.cfg";
  std::filesystem::path env = "config/env.json";
  std::filesystem::path ppo = "config/ppo.json";
};

// Everything a run depends on, loaded and validated.
struct RunConfig {
  physics::ExcavatorGeometry geometry;
  nlohmann::json materials;  // name -> material
  env::EpisodeConfig env;
  ppo::PpoConfig ppo;

  physics::SoilMaterial material(const std::string& name) const;
  nlohmann::json to_json() const;
  // FNV-1a of the canonical JSON without the step budget, so a run can be extended on resume.
  std::string hash() const;
};

// Throws UsageError naming the file (and field) at fault.
RunConfig load_run_config(const ConfigPaths& paths);

struct ReplayReport {
  bool match = false;
  int steps = 0;
  int first_divergent_step = -1;  // -1 when the initial observation already differs
  std::string detail;
};

// Re-steps the logged seed and actions and compares every step bitwise.
ReplayReport replay(const env::EpisodeRecord& record);

// Entry point of the rockcap binary; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rockcap::cli
