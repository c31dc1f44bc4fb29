// Deterministic random streams and the normal quantile used everywhere in the
// library. All randomness flows through SplitMix64 so that a (seed, draw
// order) pair fully determines every generated number, independent of the
// platform's <random> implementation.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace matchscore {

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stable 64-bit combine for deriving sub-stream seeds.
inline std::uint64_t combine_seed(std::uint64_t a, std::uint64_t b) {
  return mix64(a + 0x9e3779b97f4a7c15ull * (b + 0x632be59bd9b4e019ull));
}

// Standard normal quantile: Abramowitz-Stegun 26.2.22 initial estimate
// refined by two Halley steps on Phi computed from erfc. Relative accuracy
// ~1e-15 over the full open interval (0,1). The upper tail reflects onto the
// lower one; 1-p is exact for p >= 0.5, so no accuracy is lost there.
inline double normal_quantile(double p) {
  if (p > 0.5) return -normal_quantile(1.0 - p);
  const double t = std::sqrt(-2.0 * std::log(p));
  double x = -(t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t)));
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt2pi = 0.39894228040143267794;
  for (int i = 0; i < 2; ++i) {
    const double err = 0.5 * std::erfc(-x * inv_sqrt2) - p;
    const double delta = err / (inv_sqrt2pi * std::exp(-0.5 * x * x));
    x -= delta / (1.0 + 0.5 * x * delta);
  }
  return x;
}

// Counter-style generator: state advances by a fixed increment and the
// output is a bijective mix of it (Steele-Lea-Vigna SplitMix64).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double next_uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal() { return normal_quantile(next_uniform()); }

  // Uniform integer in [0,n) via the multiply-shift reduction.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace matchscore
