#pragma once

#include <cstdint>
#include <initializer_list>

namespace gnig {

/// Counter-based pseudo-random generator.
///
/// The key is derived by hashing a seed together with an arbitrary tuple of
/// stream identifiers (replicate index, variable index, draw index, ...).
/// The i-th output is a pure function of (key, i), so independently
/// constructed streams can be consumed in any order, or in parallel, and
/// still reproduce bit-identical results.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);
  explicit CounterRng(std::uint64_t seed) : CounterRng(seed, {}) {}

  std::uint64_t next_u64();

  /// Uniform draw strictly inside (0, 1).
  double next_unit();

  /// Standard normal draw (Box-Muller, one value per pair of uniforms).
  double next_normal();

  /// Gamma(shape, rate 1) draw, shape > 0 (Marsaglia-Tsang).
  double next_gamma(double shape);

  /// Chi-squared draw with nu > 0 degrees of freedom.
  double next_chi2(double nu) { return 2.0 * next_gamma(0.5 * nu); }

  /// Inverted-gamma draw with density proportional to
  /// x^{-d/2-1} exp(-a/(2x)); the distribution of sigma^2 when
  /// 1/sigma^2 ~ Gamma(d/2, rate a/2).
  double next_inv_gamma_halves(double d, double a);

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer; the core mixing function behind CounterRng.
std::uint64_t mix64(std::uint64_t z);

} // namespace gnig
