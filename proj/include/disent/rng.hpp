#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (key, counter): the key is derived from a
// user seed plus any number of stream indices, and the counter advances per
// draw. Nothing is shared between streams, so results do not depend on
// scheduling or on which other streams were consumed first.

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace disent {

/// SplitMix64 finalizer; bijective avalanche mix of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Folds stream indices into a seed. derive_seed(s, {a, b}) and
/// derive_seed(s, {b, a}) give unrelated keys.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t key = mix64(seed ^ 0x6A09E667F3BCC908ULL);
  for (std::uint64_t index : path) {
    key = mix64(key ^ mix64(index + 0x3C6EF372FE94F82BULL));
  }
  return key;
}

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t next_u64() noexcept {
    return mix64(key_ ^ mix64(counter_++));
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe to take the log of.
  constexpr double uniform_open() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Draws are not cached between calls, so
  /// the counter position depends only on the number of calls made.
  double normal() noexcept {
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    return r * std::cos(angle);
  }

  /// Complex normal with E|z|^2 = 1.
  std::complex<double> complex_normal() noexcept {
    const double r = std::sqrt(-std::log(uniform_open()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    return {r * std::cos(angle), r * std::sin(angle)};
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace disent
