// rng.hpp — deterministic random numbers for coupling draws.
//
// Reproducibility contract: identical seeds must give identical draws on
// every platform.  std::mt19937_64 is bit-exact everywhere by standard,
// but std::uniform_real_distribution is not, so the mapping from raw
// 64-bit words to doubles is spelled out here and never delegated.
#pragma once

#include <cstdint>
#include <random>

namespace spinbath {

// SplitMix64 finalizer (public-domain algorithm by Sebastiano Vigna).
// Used both to decorrelate user seeds and to derive per-member seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed for ensemble member `index` derived from a base seed.  Documented
// splitting rule: splitmix64(base + (index + 1) * golden-gamma).  Member
// seeds are decorrelated from each other and from the base seed itself.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

// Seeded generator with fixed double mappings.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Raw 64-bit word.
  std::uint64_t next_raw() { return gen_(); }

  // Uniform in [0, 1): top 53 bits of one raw draw, scaled by 2^-53.
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in [-width, width).
  double symmetric(double width) { return (2.0 * unit() - 1.0) * width; }

  // Uniform in [lo, hi).
  double range(double lo, double hi) { return lo + unit() * (hi - lo); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace spinbath
