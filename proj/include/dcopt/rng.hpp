#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dcopt {

// SplitMix64: 64-bit counter-based generator (Steele, Lea, Flood 2014).
// The state advances by a fixed odd constant, so the k-th output is a pure
// function of (seed, k); this keeps every data stream reproducible across
// platforms and languages.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53 random bits.
  double next_uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) without rejection (Lemire multiply-shift).
  std::uint64_t next_bounded(std::uint64_t bound) {
    return std::uint64_t((static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  // Standard normal via the Box-Muller transform. Draws two uniforms and
  // caches the second normal for the next call.
  double next_gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    have_cached_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace dcopt
