#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace loadvae {

// Deterministic random source shared by every randomized operation.
//
// The raw stream is std::mt19937_64, whose output sequence is fixed by the
// standard and therefore identical across platforms and compilers. The
// distributions are implemented here instead of with <random>'s distribution
// classes because those are implementation-defined: uniform doubles take the
// top 53 bits of a draw, and Gaussians use the Marsaglia polar method with a
// cached spare.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  /// Standard normal draw (Marsaglia polar method).
  double gaussian();

  /// Uniform integer in [0, n). Rejection-sampled, so every value is equally
  /// likely. n must be nonzero.
  std::size_t below(std::size_t n);

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Derives a stable sub-seed from a base seed and a stream tag (splitmix64
/// finalizer), so one configured seed can drive several independent streams
/// without accidental correlation.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace loadvae
