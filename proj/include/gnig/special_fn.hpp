#pragma once

#include <functional>
#include <utility>

namespace gnig {

/// log Gamma(x) for x > 0 (Lanczos approximation, relative error < 1e-13).
double log_gamma(double x);

/// Digamma psi(x) = d/dx log Gamma(x) for x > 0.
/// Upward recurrence to x >= 10, then the asymptotic Bernoulli series.
double digamma(double x);

/// Upper incomplete gamma Gamma(alpha, z) = int_z^inf e^-t t^(alpha-1) dt
/// for z > 0 and any real alpha. Positive alpha uses the standard
/// series / continued-fraction split at z = alpha + 1; alpha <= 0 is reduced
/// by the downward recurrence Gamma(alpha, z) = (Gamma(alpha+1, z) -
/// z^alpha e^-z) / alpha, with Gamma(0, z) = E1(z) handled explicitly.
double upper_incomplete_gamma(double alpha, double z);

/// Exponential integral E1(z) = Gamma(0, z), z > 0.
double exp1(double z);

struct SolveResult {
  double root = 0.0;
  double residual = 0.0;
  int iterations = 0;
  std::pair<double, double> bracket{0.0, 0.0};
};

/// Root of a continuous strictly monotone function.
///
/// The hint bracket is expanded geometrically (at most 200 times, respecting
/// an optional open lower domain bound) until the endpoints straddle zero,
/// then refined by a safeguarded secant/bisection iteration until
/// |f(root)| <= 1e-10. Throws NumericError when no sign change is found or
/// the residual tolerance cannot be met.
SolveResult solve_monotone(const std::function<double(double)>& f, double lo, double hi,
                           double domain_min = -1e308); // domain_min > -1e307 bounds the search

/// Adaptive Gauss-Legendre quadrature of f over [a, b].
/// Subdivides until the local rule agrees with its bisected refinement to
/// rel_tol (with abs_tol as a floor for near-zero integrals).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double abs_tol = 1e-300);

/// Integral of f over [a, infinity) via the substitution t = a + u/(1-u).
double integrate_semi_infinite(const std::function<double(double)>& f, double a,
                               double rel_tol = 1e-12);

/// Integral of f over the whole real line via t = center + scale*tan(u).
/// Suited to unimodal integrands with polynomial tails; center/scale should
/// roughly locate the mass.
double integrate_real_line(const std::function<double(double)>& f, double center, double scale,
                           double rel_tol = 1e-12);

} // namespace gnig
