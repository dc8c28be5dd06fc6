#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace harmony {

using ContentHash = std::array<std::uint8_t, 32>;

/// SHA-256 of the bytes.
ContentHash sha256(std::string_view bytes);
std::string to_hex(const ContentHash& hash);

/// 64-bit FNV-1a, seeded through the offset basis.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace harmony
