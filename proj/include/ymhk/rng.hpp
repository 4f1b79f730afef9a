#pragma once

#include <cstdint>

namespace ymhk {

/// Counter-based pseudo-random generator (splitmix64 finalizer chain).
///
/// Every draw is a pure function of (seed, stream, index), so field
/// initialization is reproducible bitwise regardless of evaluation order or
/// thread count.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  /// Uniform double in [0, 1).
  double uniform(std::uint64_t stream, std::uint64_t index) const noexcept {
    std::uint64_t x = mix(seed_ + kGolden * (stream + 1));
    x = mix(x + kGolden * (index + 1));
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [-amplitude, amplitude).
  double symmetric(std::uint64_t stream, std::uint64_t index,
                   double amplitude) const noexcept {
    return amplitude * (2.0 * uniform(stream, index) - 1.0);
  }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace ymhk
