#include "gnig/rng.hpp"

#include <cmath>

#include "gnig/errors.hpp"

namespace gnig {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::uint64_t k = mix64(seed);
  for (std::uint64_t id : stream) {
    k = mix64(k ^ mix64(id));
  }
  key_ = k;
}

std::uint64_t CounterRng::next_u64() { return mix64(key_ + (counter_++) * kGolden); }

double CounterRng::next_unit() {
  // 53-bit mantissa, shifted to the open interval.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal() {
  const double u1 = next_unit();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double CounterRng::next_gamma(double shape) {
  if (!(shape > 0.0)) throw NumericError("gamma shape must be positive");
  if (shape < 1.0) {
    // Boost to shape+1 and scale back.
    const double u = next_unit();
    return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = next_normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = next_unit();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

double CounterRng::next_inv_gamma_halves(double d, double a) {
  if (!(d > 0.0) || !(a > 0.0)) throw NumericError("inverted-gamma parameters must be positive");
  const double precision = next_gamma(0.5 * d) * (2.0 / a);
  return 1.0 / precision;
}

} // namespace gnig
