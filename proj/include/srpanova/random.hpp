#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace srp {

/**
 * Seeded generator with platform-independent variate transforms.
 *
 * The engine is mt19937_64 (fully specified by the standard); the uniform,
 * normal and Poisson transforms are implemented here rather than taken from
 * <random> distributions, whose algorithms vary between standard libraries.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal, Box-Muller (one variate per call).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Inversion below mean 10, Hormann's PTRS transformed rejection above.
  std::int64_t poisson(double mean);
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for one chain: mixes the master seed, the model label and the chain index.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index);

}  // namespace srp
