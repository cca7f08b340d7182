#pragma once

#include <cstdint>
#include <random>

#include "qmcsa/detail/special.hpp"

namespace qmcsa {

/// splitmix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed number `index` of `parent`. Children are independent of how
/// many siblings exist, so growing a run set never perturbs earlier members.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Seeded generator with platform-independent uniform and normal draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by inversion.
  double normal() { return detail::normal_quantile(uniform_open()); }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qmcsa
