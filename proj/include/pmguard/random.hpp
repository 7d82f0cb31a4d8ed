#pragma once

#include <cstdint>
#include <random>

namespace pmguard {

// Deterministic generator. Bounded draws use rejection sampling on the raw
// 64-bit stream so results do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer over (master, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace pmguard
