#pragma once
// Random draws built directly on mt19937_64 output so streams are identical
// across standard-library implementations.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace edgetwin {

inline double rng_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
}

inline double rng_uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * rng_uniform(rng);
}

inline double rng_normal(std::mt19937_64& rng, double mean = 0.0, double stddev = 1.0) {
  // Box-Muller without state so draws map 1:1 onto the engine stream.
  double u1 = rng_uniform(rng);
  while (u1 <= 0.0) u1 = rng_uniform(rng);
  const double u2 = rng_uniform(rng);
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                    std::cos(2.0 * std::numbers::pi * u2);
}

inline int rng_index(std::mt19937_64& rng, int n) {
  return static_cast<int>(rng_uniform(rng) * n) % n;  // n must be >= 1
}

/// Derives an independent engine for a named substream of a master seed.
inline std::mt19937_64 rng_substream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return std::mt19937_64(z ^ (z >> 31));
}

}  // namespace edgetwin
