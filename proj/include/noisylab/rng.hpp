// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

namespace noisylab::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer. All randomness in this project is derived from it so
// that results are identical across platforms and standard-library versions.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (splitmix64(b) + kGolden + (a << 6) + (a >> 2)));
}

// Hash a (seed, key, key, ...) tuple into one 64-bit value. Used to key
// per-item draws and shuffle ranks so they are order-independent.
template <class... Keys>
constexpr std::uint64_t chain(std::uint64_t seed, Keys... keys) {
  std::uint64_t h = splitmix64(seed);
  ((h = mix(h, static_cast<std::uint64_t>(keys))), ...);
  return h;
}

// Maps a 64-bit hash to a double in [0, 1).
constexpr double to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Sequential deterministic stream, used for parameter initialization.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(splitmix64(seed)) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  double next_unit() { return to_unit(next_u64()); }

  // Uniform draw from [-bound, bound).
  double next_symmetric(double bound) { return (2.0 * next_unit() - 1.0) * bound; }

 private:
  std::uint64_t state_;
};

}  // namespace noisylab::rng
