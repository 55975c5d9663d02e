#pragma once

#include <cstdint>
#include <random>

namespace omniloc {

/// Deterministic random stream. Wraps std::mt19937_64 but converts to double
/// by hand so sequences are bit-stable across standard libraries (the
/// distribution classes in <random> are not required to agree between
/// implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1): top 53 bits of the engine output.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive. Uses rejection to stay
  /// unbiased and implementation-independent.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace omniloc
