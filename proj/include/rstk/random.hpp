#pragma once

#include <cstdint>

namespace rstk::rng {

/// SplitMix64 generator. Used instead of <random> distributions so that
/// seeded streams are identical across standard library implementations.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1): the 53 high bits of one draw.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Gaussian via Box-Muller (two uniforms per draw, no cache).
  double normal(double mu = 0.0, double sigma = 1.0);
};

inline double uniform01(SplitMix64& g) { return g.uniform01(); }
inline double uniform(SplitMix64& g, double a, double b) {
  return g.uniform(a, b);
}
inline double normal(SplitMix64& g, double mu = 0.0, double sigma = 1.0) {
  return g.normal(mu, sigma);
}

}  // namespace rstk::rng
