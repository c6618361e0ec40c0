#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "twicing/matrix.hpp"

namespace twicing {

/// SplitMix64 (Steele, Lea & Flood). A counter-based generator: the k-th
/// output is a fixed bijective mix of seed + k * 0x9E3779B97F4A7C15, so a
/// seed reproduces the same stream on every platform. Distributions are
/// derived here rather than through <random>, whose distributions are
/// implementation-defined.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline Matrix random_normal(std::size_t rows, std::size_t cols, SplitMix64& rng) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.normal();
  return m;
}

inline Matrix random_uniform(std::size_t rows, std::size_t cols, double lo, double hi,
                             SplitMix64& rng) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.uniform(lo, hi);
  return m;
}

/// Random row-stochastic matrix with strictly positive entries.
inline Matrix random_row_stochastic(std::size_t n, SplitMix64& rng) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double& x : a.row(i)) {
      x = rng.uniform(0.01, 1.0);
      s += x;
    }
    for (double& x : a.row(i)) x /= s;
  }
  return a;
}

}  // namespace twicing
