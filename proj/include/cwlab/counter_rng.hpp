#pragma once

#include <cstdint>

// Counter-based randomness shared by the environment and the walkers.
//
// Edge uniforms are a pure function of (seed, edge index, lane):
//
//   counter(x)          = (|x| << 1) | (x < 0)
//   edge_bits(s, x, j)  = mix64(mix64(s) ^ mix64(4 * counter(x) + j))
//   U(s, x, j)          = ((edge_bits >> 11) + 0.5) * 2^-53      in (0, 1)
//
// where mix64 is one SplitMix64 output step applied to its argument.
// Walkers draw from a SplitMix64 stream whose state starts at
// mix64(mix64(master_seed) ^ mix64(walker_index)).

namespace cwlab::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t keyed(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(mix64(key) ^ mix64(counter));
}

/// Maps 64 random bits to a double strictly inside (0, 1).
constexpr double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1p-52;
}

constexpr std::uint64_t edge_counter(std::int64_t x) noexcept {
  const std::uint64_t mag = x < 0 ? static_cast<std::uint64_t>(-(x + 1)) + 1
                                  : static_cast<std::uint64_t>(x);
  return (mag << 1) | (x < 0 ? 1U : 0U);
}

constexpr double edge_uniform(std::uint64_t seed, std::int64_t x,
                              unsigned lane = 0) noexcept {
  return open_unit(keyed(seed, 4 * edge_counter(x) + lane));
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr SplitMix64 for_stream(std::uint64_t master_seed,
                                         std::uint64_t index) noexcept {
    return SplitMix64(keyed(master_seed, index));
  }

  constexpr std::uint64_t next() noexcept {
    const std::uint64_t z = mix64(state_);
    state_ += kGolden;
    return z;
  }

  constexpr double uniform() noexcept { return open_unit(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace cwlab::rng
