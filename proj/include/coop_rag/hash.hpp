#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace coop_rag {

// MurmurHash64A (Austin Appleby, public domain). Byte order is fixed to
// little-endian reads so results agree across platforms.
constexpr std::uint64_t kMurmurSeed = 0;

inline std::uint64_t murmur64a(std::string_view data, std::uint64_t seed = kMurmurSeed) noexcept {
  constexpr std::uint64_t m = 0xc6a4a7935bd1e995ULL;
  constexpr int r = 47;
  const auto *bytes = reinterpret_cast<const unsigned char *>(data.data());
  const std::size_t len = data.size();

  std::uint64_t h = seed ^ (len * m);

  const std::size_t blocks = len / 8;
  for (std::size_t i = 0; i < blocks; ++i) {
    std::uint64_t k = 0;
    for (int b = 7; b >= 0; --b) {
      k = (k << 8) | bytes[i * 8 + static_cast<std::size_t>(b)];
    }
    k *= m;
    k ^= k >> r;
    k *= m;
    h ^= k;
    h *= m;
  }

  const unsigned char *tail = bytes + blocks * 8;
  switch (len & 7) {
    case 7: h ^= std::uint64_t(tail[6]) << 48; [[fallthrough]];
    case 6: h ^= std::uint64_t(tail[5]) << 40; [[fallthrough]];
    case 5: h ^= std::uint64_t(tail[4]) << 32; [[fallthrough]];
    case 4: h ^= std::uint64_t(tail[3]) << 24; [[fallthrough]];
    case 3: h ^= std::uint64_t(tail[2]) << 16; [[fallthrough]];
    case 2: h ^= std::uint64_t(tail[1]) << 8; [[fallthrough]];
    case 1:
      h ^= std::uint64_t(tail[0]);
      h *= m;
      break;
    default:
      break;
  }

  h ^= h >> r;
  h *= m;
  h ^= h >> r;
  return h;
}

inline std::string to_hex(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

} // namespace coop_rag
