/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/rng.hpp
 * @brief Deterministic RNG utilities.
 *
 * All randomized behavior in the system flows through this header so that a
 * fixed seed reproduces runs bit-for-bit on one platform. std::mt19937_64 has a
 * standardized output sequence; the bounded/real draws below avoid the
 * implementation-defined std distributions.
 */
#pragma once

#include <cstdint>
#include <random>

namespace minisage {

/// splitmix64 finalizer; decorrelates structured seed inputs.
inline std::uint64_t hash_u64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Combines seed components (e.g. global seed, vertex id, layer) into one seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return hash_u64(a ^ (hash_u64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0. Rejection sampling,
  /// so the result is exactly uniform.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform float in [lo, hi).
  float next_float(float lo, float hi) {
    return lo + static_cast<float>(next_double()) * (hi - lo);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace minisage
