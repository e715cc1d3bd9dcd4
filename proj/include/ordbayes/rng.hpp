#pragma once

// Deterministic random streams for the samplers and simulators.
//
// Generator: xoshiro256++ (Blackman & Vigna), state filled from the 64-bit
// seed with successive SplitMix64 outputs. Substream k derives its seed as
// splitmix64(seed + (k+1) * 0x9E3779B97F4A7C15). All variate transforms are
// spelled out below (53-bit uniforms, Box-Muller normals, inverse-CDF
// Cauchy) so identical seeds reproduce identical streams everywhere.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ordbayes {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
  }

  /// Independent stream k of a base seed (chains, replicate experiments).
  static Rng substream(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t s = seed + (k + 1) * 0x9E3779B97F4A7C15ULL;
    return Rng(splitmix64_next(s));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double log_uniform() { return std::log(uniform_pos()); }

  /// Standard normal via Box-Muller (no state beyond the uniform stream).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double cauchy(double location, double scale) {
    return location + scale * std::tan(std::numbers::pi * (uniform() - 0.5));
  }

  /// Uniform integer in [0, n); n must be positive. Unbiased via rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

} // namespace ordbayes
