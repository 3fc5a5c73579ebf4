#pragma once

#include <array>
#include <cstdint>

namespace aoi {

/// Philox4x64-10 block function.
using PhiloxBlock = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;
PhiloxBlock philox4x64(PhiloxBlock counter, PhiloxKey key) noexcept;

/// Counter-based stream keyed by (seed, stream id). Streams with different
/// ids are independent, so run r of a Monte Carlo batch draws the same
/// numbers whichever thread executes it.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : key_{seed, stream} {}

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  bool bernoulli(double p) noexcept { return p >= 1.0 || uniform() < p; }

 private:
  PhiloxKey key_;
  PhiloxBlock counter_{};
  PhiloxBlock buffer_{};
  int used_ = 4;
};

}  // namespace aoi
