#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>

namespace cmdp {

/// SplitMix64 avalanche finalizer (Vigna 2015, public domain reference code).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic, portable 64-bit generator built on SplitMix64.
///
/// Streams are derived by key, not by jumping: `substream(seed, {a, b, c})`
/// hashes the path into an independent starting state, so per-(cell, run,
/// episode) streams never overlap regardless of how much each one consumes.
/// All floating-point mappings are explicit (no std::distribution), which
/// keeps byte-identical output across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Standard normal via Box-Muller (cosine branch, one draw per pair).
  double next_gaussian() {
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  /// Index drawn from an unnormalized weight row (cumulative walk).
  int next_categorical(std::span<const double> weights) {
    if (weights.empty()) throw std::invalid_argument("next_categorical: empty weights");
    double total = 0.0;
    for (double w : weights) total += w;
    double target = next_double() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      cum += weights[i];
      if (target < cum) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size() - 1);
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and an index path.
inline std::uint64_t substream(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(base);
  for (std::uint64_t id : path) s = mix64(s ^ mix64(id ^ 0xa0761d6478bd642fULL));
  return s;
}

}  // namespace cmdp
