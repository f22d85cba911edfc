#include "rockcap/core/version.hpp"

#include <fmt/format.h>

namespace rockcap {

std::string_view build_version() { return ROCKCAP_GIT_DESCRIBE; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

}  // namespace rockcap
