#pragma once

#include <cstdint>

namespace pettis::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Stream seed for path k, a pure function of (master_seed, k).
constexpr std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t k) {
  return mix64(master_seed + kGolden * (k + 1));
}

// Uniform draw in the open interval (0, 1), a pure function of
// (stream, counter); no generator state exists anywhere.
inline double uniform01(std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t bits = mix64(stream + kGolden * (counter + 1));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via the inverse CDF of the counter-based uniform stream.
double standard_normal(std::uint64_t stream, std::uint64_t counter);

}  // namespace pettis::rng
