#pragma once

#include <cmath>
#include <cstdint>

namespace cimforge {

// splitmix64 output permutation (Steele/Vigna constants).
constexpr std::uint64_t mix_bits(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// Counter-based random stream. A stream is an immutable 64-bit key; every
// draw is a pure function of (key, counter). Sub-streams are derived by
// folding identifiers into the key, so the draw for (seed, tile, column, ...)
// is the same no matter which thread evaluates it or in what order.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept
      : key_(mix_bits(seed + kGoldenGamma)) {}

  [[nodiscard]] constexpr CounterRng derive(std::uint64_t word) const noexcept {
    CounterRng sub = *this;
    sub.key_ = mix_bits(key_ ^ (word + kGoldenGamma));
    return sub;
  }

  constexpr std::uint64_t word(std::uint64_t counter) const noexcept {
    return mix_bits(key_ ^ mix_bits(counter + kGoldenGamma));
  }

  // Uniform draw on (0, 1].
  double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>((word(counter) >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal draw (Box-Muller; consumes counters 2c and 2c+1).
  double gaussian(std::uint64_t counter) const noexcept {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace cimforge
