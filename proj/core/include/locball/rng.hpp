#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace locball {

/// Mixes a seed with a path of stream indices into an independent 64-bit key.
/// Streams form a tree: derive_seed(s, {a, b}) == derive_seed(derive_seed(s, {a}), {b}).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept;

/// Splittable generator: xoshiro256++ keyed by a derived seed. Every sample
/// stream in the library is a pure function of (seed, stream indices), which
/// keeps parallel results independent of scheduling.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
      : Rng(derive_seed(seed, path)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52;
  }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, second variate cached).
  double normal() noexcept;
  /// Exponential with unit rate.
  double exponential() noexcept;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace locball
