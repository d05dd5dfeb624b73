#pragma once

#include <cmath>
#include <cstdint>

namespace frictorq {

/// Counter-based Gaussian noise source. Each (seed, counter) pair maps to a
/// fixed value through the SplitMix64 finalizer, so draws are reproducible
/// without carrying generator state: channel c at tick k reads counter
/// k * n_channels + c and two runs with the same seed see identical streams
/// regardless of evaluation order.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed) : seed_(seed) {}

  /// Uniform in (0, 1], never exactly zero so log() below is safe.
  double uniform(uint64_t counter) const {
    const uint64_t bits = mix(seed_ + (counter + 1) * 0x9e3779b97f4a7c15ull);
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on two derived counters.
  double normal(uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  uint64_t seed_;
};

}  // namespace frictorq
