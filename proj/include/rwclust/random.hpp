#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace rwclust {

// Seeding scheme
// --------------
// Every random quantity is drawn from a stream identified by
// (master seed, stream tag, index). derive_seed() hashes that triple with the
// SplitMix64 finalizer; the result seeds an independent xoshiro256** engine.
// Streams never share state, so draws for column j do not depend on how many
// draws other columns consumed, and adding streams never perturbs old ones.

enum class StreamTag : std::uint64_t {
  labels = 0x6c61626c,
  mu = 0x6d75,
  noise = 0x6e6f6973,
  coloring = 0x636f6c72,
  greedy_restart = 0x67726479,
  sweep_cell = 0x63656c6c,
  trial = 0x7472696c,
  kmeans = 0x6b6d6e73,
  power_start = 0x70777273,
};

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, StreamTag tag, std::uint64_t index = 0) noexcept {
  return mix64(mix64(parent ^ mix64(static_cast<std::uint64_t>(tag))) + mix64(index + 0x5851f42d4c957f2dULL));
}

/// Maps 64 random bits to a double in [0, 1) using the top 53 bits.
constexpr double bits_to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// xoshiro256** with SplitMix64 state expansion. Satisfies
/// UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  double uniform() noexcept { return bits_to_unit((*this)()); }

  /// Standard normal via the Marsaglia polar method; the spare variate is cached.
  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rwclust
