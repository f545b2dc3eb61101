#pragma once

#include <cstdint>

namespace cvmshift {

/// Counter-based generator: every variate is a pure function of
/// (seed, stream, counter), so replication loops can run in any order,
/// on any number of threads, and still produce identical output.
///
/// The mixing function is the SplitMix64 finalizer applied to a keyed
/// combination of the three words.
struct CounterRng {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// Raw 64 mixed bits for a counter value.
  std::uint64_t bits(std::uint64_t counter) const noexcept;

  /// Uniform variate in the open interval (0, 1).
  double uniform(std::uint64_t counter) const noexcept;

  /// Standard normal variate via the inverse-CDF method.
  double normal(std::uint64_t counter) const noexcept;
};

/// Stable per-replicate seed derivation for sharded Monte Carlo.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

/// Standard normal quantile function on (0, 1). Acklam's rational
/// approximation polished with one Halley step; absolute error is at
/// the few-ulp level across the full range.
double normal_quantile(double p);

}  // namespace cvmshift
