#pragma once

// Deterministic random stream used everywhere randomness is needed, so that a
// run is replayable from its seed alone (and re-implementable in another
// language from this description).
//
// Stream algorithm: xorshift64* (Marsaglia/Vigna).
//   state' : s ^= s >> 12; s ^= s << 25; s ^= s >> 27
//   output : state' * 0x2545F4914F6CDD1D
// The raw seed is whitened once through SplitMix64 before use; a whitened
// value of zero is replaced by 0x9E3779B97F4A7C15 (xorshift state must be
// nonzero). Test vectors are frozen in tests/rng_test.cpp.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace stcomp {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    state_ = splitmix64(sm);
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
  }

  std::uint64_t next_u64() {
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1DULL;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; consumes two uniforms per pair,
  /// the second variate is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // u1 in (0,1] so log(u1) is finite.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  /// Integer in [0, n), n >= 1 (rejection-free modulo; bias is negligible for
  /// the small n used here and keeps the stream layout trivial to document).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace stcomp
