#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace rockcap {

// Seeded random stream. Wraps std::mt19937_64 with its own uniform/normal transforms so draws are
// identical across standard library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Independent child stream for (seed, index), e.g. one per environment worker.
  static RandomStream derive(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::string serialize() const;
  void deserialize(const std::string& state);

  bool operator==(const RandomStream& o) const {
    return engine_ == o.engine_ && has_spare_ == o.has_spare_ && spare_ == o.spare_;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace rockcap
