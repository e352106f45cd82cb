#include "gnig/special_fn.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "gnig/errors.hpp"

namespace gnig {

double log_gamma(double x) {
  if (!(x > 0.0)) throw NumericError("log_gamma: argument must be positive");
  // Lanczos, g = 7, 9 coefficients.
  static const std::array<double, 9> coef = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection keeps the series argument away from 0.
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double sum = coef[0];
  for (int i = 1; i < 9; ++i) sum += coef[i] / (z + i);
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

double digamma(double x) {
  if (!(x > 0.0)) throw NumericError("digamma: argument must be positive");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic series with Bernoulli coefficients through x^-12.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = -1.0 / 12.0 +
                  inv2 * (1.0 / 120.0 +
                          inv2 * (-1.0 / 252.0 +
                                  inv2 * (1.0 / 240.0 +
                                          inv2 * (-1.0 / 132.0 + inv2 * (691.0 / 32760.0)))));
  return result + std::log(x) - 0.5 * inv + inv2 * series;
}

namespace {

// Regularized lower incomplete gamma P(a, x) by series, a > 0, x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction,
// a > 0, x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - log_gamma(a));
}

double upper_gamma_positive(double alpha, double z) {
  if (z < alpha + 1.0) {
    return std::exp(log_gamma(alpha)) * (1.0 - gamma_p_series(alpha, z));
  }
  return std::exp(log_gamma(alpha)) * gamma_q_cf(alpha, z);
}

} // namespace

double exp1(double z) {
  if (!(z > 0.0)) throw NumericError("exp1: argument must be positive");
  if (z <= 1.0) {
    // E1(z) = -gamma - log z + sum_{n>=1} (-1)^{n+1} z^n / (n n!)
    const double euler = 0.57721566490153286060651209008240;
    double sum = 0.0;
    double term = 1.0;
    for (int n = 1; n < 200; ++n) {
      term *= -z / n;
      const double contrib = -term / n;
      sum += contrib;
      if (std::abs(contrib) < std::abs(sum) * 1e-17 + 1e-300) break;
    }
    return -euler - std::log(z) + sum;
  }
  // Lentz continued fraction: E1(z) = e^-z / (z + 1/(1 + 1/(z + 2/(1 + ...))))
  const double tiny = 1e-300;
  double b = z + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-z);
}

double upper_incomplete_gamma(double alpha, double z) {
  if (!(z > 0.0)) throw NumericError("upper_incomplete_gamma: z must be positive");
  if (alpha > 0.0) return upper_gamma_positive(alpha, z);

  // Reduce alpha <= 0 by downward recurrence from a positive (or zero) start.
  const double rounded = std::round(alpha);
  const bool integer_alpha = std::abs(alpha - rounded) < 1e-12;
  int steps;
  double a_hi, value;
  if (integer_alpha) {
    steps = static_cast<int>(-rounded);
    a_hi = 0.0;
    value = exp1(z);
  } else {
    steps = static_cast<int>(std::ceil(-alpha));
    a_hi = alpha + steps; // in (0, 1)
    value = upper_gamma_positive(a_hi, z);
  }
  const double log_z = std::log(z);
  for (int j = 1; j <= steps; ++j) {
    const double a_cur = a_hi - j;
    value = (value - std::exp(a_cur * log_z - z)) / a_cur;
  }
  return value;
}

SolveResult solve_monotone(const std::function<double(double)>& f, double lo, double hi,
                           double domain_min) {
  if (!(lo < hi)) throw NumericError("solve_monotone: invalid bracket hint");
  const bool bounded_below = domain_min > -1e307;
  double flo = f(lo);
  double fhi = f(hi);
  int expansions = 0;
  double width = hi - lo;
  while (flo * fhi > 0.0) {
    if (++expansions > 200) throw NumericError("solve_monotone: no sign change after 200 expansions");
    // Monotone f with equal signs at both ends: the root lies on the side
    // where |f| is smaller.
    if (std::abs(flo) <= std::abs(fhi)) {
      const double next = bounded_below ? domain_min + 0.5 * (lo - domain_min) : lo - width;
      hi = lo;
      fhi = flo;
      lo = next;
      flo = f(lo);
    } else {
      const double next = hi + width;
      lo = hi;
      flo = fhi;
      hi = next;
      fhi = f(hi);
    }
    width *= 2.0;
  }
  if (flo == 0.0) return {lo, 0.0, expansions, {lo, hi}};
  if (fhi == 0.0) return {hi, 0.0, expansions, {lo, hi}};

  const std::pair<double, double> bracket{lo, hi};
  double root = 0.5 * (lo + hi);
  double froot = f(root);
  int iterations = 0;
  while (std::abs(froot) > 1e-10 && iterations < 200) {
    ++iterations;
    if (flo * froot < 0.0) {
      hi = root;
      fhi = froot;
    } else {
      lo = root;
      flo = froot;
    }
    // Secant step from the current bracket endpoints; bisect when it leaves
    // the bracket or stalls.
    double candidate = lo - flo * (hi - lo) / (fhi - flo);
    if (!(candidate > lo && candidate < hi)) candidate = 0.5 * (lo + hi);
    if (candidate == lo || candidate == hi) candidate = 0.5 * (lo + hi);
    root = candidate;
    froot = f(root);
    if (lo == hi) break;
  }
  if (std::abs(froot) > 1e-10) throw NumericError("solve_monotone: residual tolerance not reached");
  return {root, froot, iterations, bracket};
}

namespace {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre nodes on (-1, 1) by Newton iteration on P_n.
GaussRule make_gauss_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

const GaussRule& gauss20() {
  static const GaussRule rule = make_gauss_rule(20);
  return rule;
}

double gauss_panel(const std::function<double(double)>& f, double a, double b) {
  const GaussRule& rule = gauss20();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return sum * half;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double whole,
                          double rel_tol, double abs_tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss_panel(f, a, mid);
  const double right = gauss_panel(f, mid, b);
  const double refined = left + right;
  if (std::abs(refined - whole) <= rel_tol * std::abs(refined) + abs_tol || depth >= 48) {
    return refined;
  }
  return integrate_adaptive(f, a, mid, left, rel_tol, 0.5 * abs_tol, depth + 1) +
         integrate_adaptive(f, mid, b, right, rel_tol, 0.5 * abs_tol, depth + 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_tol) {
  if (a == b) return 0.0;
  return integrate_adaptive(f, a, b, gauss_panel(f, a, b), rel_tol, abs_tol, 0);
}

double integrate_semi_infinite(const std::function<double(double)>& f, double a, double rel_tol) {
  auto transformed = [&f, a](double u) {
    const double one_minus = 1.0 - u;
    const double t = a + u / one_minus;
    const double jac = 1.0 / (one_minus * one_minus);
    const double v = f(t);
    return v == 0.0 ? 0.0 : v * jac;
  };
  // Stop just short of u = 1; the integrand must vanish there.
  return integrate(transformed, 0.0, 1.0 - 1e-14, rel_tol);
}

double integrate_real_line(const std::function<double(double)>& f, double center, double scale,
                           double rel_tol) {
  if (!(scale > 0.0)) throw NumericError("integrate_real_line: scale must be positive");
  auto transformed = [&f, center, scale](double u) {
    const double c = std::cos(u);
    const double t = center + scale * std::tan(u);
    const double jac = scale / (c * c);
    const double v = f(t);
    return v == 0.0 ? 0.0 : v * jac;
  };
  const double half_pi = 1.57079632679489661923;
  return integrate(transformed, -half_pi + 1e-13, half_pi - 1e-13, rel_tol);
}

} // namespace gnig
