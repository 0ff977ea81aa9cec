#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace orbi {

/// Seeded generator with a platform-independent mapping to doubles, so
/// sampled reports are byte-identical across standard library builds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  int sign() { return (engine_() & 1U) ? 1 : -1; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace orbi
