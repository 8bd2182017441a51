#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace smcf {

inline constexpr std::uint64_t kSeedStride = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output function (Steele, Lea and Flood's mixer).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stream seed for replicate i of a run: splitmix64_mix(master + i * stride),
// all arithmetic wrapping mod 2^64. Pinned by tests; do not change.
constexpr std::uint64_t replicate_seed(std::uint64_t master_seed,
                                       std::uint64_t replicate) noexcept {
  return splitmix64_mix(master_seed + replicate * kSeedStride);
}

// Deterministic random stream. Only standard-specified machinery is used
// (the raw mt19937_64 sequence plus fixed bit manipulation), so identical
// seeds give identical draws on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_bits() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Unbiased uniform draw from {0, ..., n-1} by rejection.
  std::size_t uniform_index(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() / n * n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % n);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace smcf
