#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lorecast {

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// 16 lowercase hex digits of fnv1a64(data).
std::string content_digest(std::string_view data);

}  // namespace lorecast
