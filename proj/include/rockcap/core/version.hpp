#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rockcap {

// git-describe string captured at configure time.
std::string_view build_version();

// 64-bit FNV-1a, used for config provenance hashes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

}  // namespace rockcap
