#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "rockcap/nn/policy.hpp"

namespace rockcap::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Not a checkpoint (bad magic bytes).
struct CheckpointFormatError : CheckpointError {
  using CheckpointError::CheckpointError;
};
struct CheckpointVersionError : CheckpointError {
  using CheckpointError::CheckpointError;
};
struct CheckpointTruncatedError : CheckpointError {
  using CheckpointError::CheckpointError;
};
// Stored network shapes differ from the destination networks.
struct CheckpointShapeError : CheckpointError {
  using CheckpointError::CheckpointError;
};

struct CheckpointMetadata {
  std::uint64_t total_steps = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string version;
  std::string extra;  // free-form JSON

  bool operator==(const CheckpointMetadata&) const = default;
};

struct Checkpoint {
  GaussianPolicy policy;
  ValueNet value;
  AdamState policy_adam;
  AdamState value_adam;
  CheckpointMetadata metadata;
};

std::string encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Loads into networks of a fixed architecture; throws CheckpointShapeError if they differ.
void load_checkpoint_into(const std::filesystem::path& path, Checkpoint& slot);
void check_same_shapes(const Checkpoint& stored, const Checkpoint& slot);

}  // namespace rockcap::nn
