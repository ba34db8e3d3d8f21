#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "navkit/geometry.hpp"

namespace navkit {

/// Child stream seed: SplitMix64 finalizer applied to (parent, index).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

/**
 * Seedable stream used by the simulator. Raw bits come from std::mt19937_64,
 * whose output sequence is fixed by the C++ standard. Uniform and normal
 * variates are derived here rather than through <random> distributions,
 * whose algorithms differ between standard libraries.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  Vector3 normal3() { return {normal(), normal(), normal()}; }
  /// Uniform direction on the unit sphere.
  Vector3 unit_vector();

private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace navkit
