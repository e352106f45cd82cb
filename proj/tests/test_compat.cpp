#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gnig/compat.hpp"
#include "gnig/errors.hpp"
#include "gnig/experiments.hpp"
#include "oracles.hpp"

using namespace gnig;

namespace {

Eigen::MatrixXd mean_model_design(int n) { return Eigen::MatrixXd::Ones(n, 1); }

// Correlated fixture used by several coherence checks.
Dataset correlated_fixture() {
  std::mt19937_64 gen(202);
  const Eigen::MatrixXd X = oracle::random_design(gen, 12, 4);
  Eigen::VectorXd y = X * Eigen::Vector4d(1.0, 0.8, -0.5, 0.0) + oracle::random_vector(gen, 12);
  return make_dataset(std::move(y), X);
}

} // namespace

TEST_CASE("kl divergence of identical distributions is zero") {
  std::mt19937_64 gen(1);
  const Eigen::MatrixXd X = oracle::random_design(gen, 8, 3);
  const ModelId model({0, 1});
  Eigen::VectorXd beta(3);
  beta << 1.2, -0.4, 0.0; // no weight on the dropped column
  const Eigen::VectorXd beta_k = subvector(beta, model);
  CHECK(kl_divergence(beta, 0.7, beta_k, 0.7, model, X) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("kl divergence at the mean projection equals the scaled lack of fit") {
  std::mt19937_64 gen(2);
  const Eigen::MatrixXd X = oracle::random_design(gen, 9, 3);
  const ModelId model({0, 2});
  const Eigen::VectorXd beta = oracle::random_vector(gen, 3, 2.0);
  const double sigma2 = 1.3;
  const KlProjectionPoint point = kl_project(beta, sigma2, model, X);
  const double div = kl_divergence(beta, sigma2, point.beta_perp, sigma2, model, X);
  const double n_q = 9.0 * quad_form_Qk(beta, model, X);
  CHECK(div == doctest::Approx(n_q / (2.0 * sigma2)).epsilon(1e-10));
}

TEST_CASE("kl divergence matches a Monte Carlo estimate between explicit normals") {
  Eigen::MatrixXd X(3, 2);
  X << 1, -1, 1, 0, 1, 1;
  const ModelId model({0});
  Eigen::VectorXd beta(2);
  beta << 0.5, 1.5;
  Eigen::VectorXd beta_k(1);
  beta_k << 0.9;
  const double s2 = 0.8, s2k = 1.7;
  const double closed = kl_divergence(beta, s2, beta_k, s2k, model, X);

  const Eigen::VectorXd m_p = X * beta;
  const Eigen::VectorXd m_q = Eigen::VectorXd::Constant(3, 0.9);
  std::mt19937_64 gen(3);
  oracle::MeanAccumulator acc;
  for (int i = 0; i < 1000000; ++i) {
    const Eigen::VectorXd x = m_p + std::sqrt(s2) * oracle::random_vector(gen, 3);
    const double log_p = -1.5 * std::log(2 * M_PI * s2) - (x - m_p).squaredNorm() / (2 * s2);
    const double log_q = -1.5 * std::log(2 * M_PI * s2k) - (x - m_q).squaredNorm() / (2 * s2k);
    acc.add(log_p - log_q);
  }
  CHECK(std::abs(closed - acc.mean()) < 3.0 * acc.se());
}

TEST_CASE("kl projection closed form") {
  // beta with no dropped component projects to itself
  std::mt19937_64 gen(4);
  const Eigen::MatrixXd X = oracle::random_design(gen, 7, 3);
  const ModelId model({0, 1});
  Eigen::VectorXd beta(3);
  beta << 0.3, -1.1, 0.0;
  const KlProjectionPoint same = kl_project(beta, 0.9, model, X);
  CHECK((same.beta_perp - subvector(beta, model)).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(same.sigma2_perp == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(same.sigma2_perp >= 0.9);

  // simple regression dropped to its location model:
  // (alpha, beta, s2) -> (alpha + beta xbar, s2 + beta^2 (1/n) sum (x-xbar)^2)
  Eigen::MatrixXd SR(4, 2);
  SR << 1, 0.5, 1, 1.5, 1, 2.0, 1, 4.0;
  const double xbar = SR.col(1).mean();
  const double css = (SR.col(1).array() - xbar).square().sum();
  Eigen::VectorXd ab(2);
  ab << 0.7, -1.3;
  const KlProjectionPoint pt = kl_project(ab, 0.6, ModelId::intercept_only(), SR);
  CHECK(pt.beta_perp(0) == doctest::Approx(0.7 - 1.3 * xbar).epsilon(1e-12));
  CHECK(pt.sigma2_perp == doctest::Approx(0.6 + 1.3 * 1.3 * css / 4.0).epsilon(1e-12));
}

TEST_CASE("kl projection minimizes the divergence on a grid") {
  Eigen::MatrixXd X(5, 2);
  X << 1, -2, 1, -1, 1, 0, 1, 1, 1, 2;
  Eigen::VectorXd beta(2);
  beta << 0.4, 0.9;
  const double sigma2 = 0.5;
  const ModelId model({0});
  const KlProjectionPoint best = kl_project(beta, sigma2, model, X);
  const double best_div =
      kl_divergence(beta, sigma2, best.beta_perp, best.sigma2_perp, model, X);
  for (double bk = -1.0; bk <= 2.0; bk += 0.05) {
    for (double s2k = 0.1; s2k <= 6.0; s2k += 0.05) {
      Eigen::VectorXd cand(1);
      cand << bk;
      CHECK(kl_divergence(beta, sigma2, cand, s2k, model, X) >= best_div - 1e-12);
    }
  }
}

TEST_CASE("kl projection commutes with a recentering reparametrization") {
  std::mt19937_64 gen(5);
  const Eigen::MatrixXd X = oracle::random_design(gen, 10, 3);
  const ModelId model({0, 1});
  const int dropped_col = 2;
  const double xbar = X.col(dropped_col).mean();

  // recenter the dropped column; the full-model coefficients transform by
  // beta0' = beta0 + xbar * beta_j, other coordinates unchanged
  Eigen::MatrixXd Xc = X;
  Xc.col(dropped_col).array() -= xbar;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd beta = oracle::random_vector(gen, 3, 2.0);
    Eigen::VectorXd beta_prime = beta;
    beta_prime(0) += xbar * beta(dropped_col);
    const double s2 = 0.4 + std::abs(beta(0));
    const KlProjectionPoint a = kl_project(beta, s2, model, X);
    const KlProjectionPoint b = kl_project(beta_prime, s2, model, Xc);
    CHECK((a.beta_perp - b.beta_perp).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(a.sigma2_perp == doctest::Approx(b.sigma2_perp).epsilon(1e-10));
  }
}

TEST_CASE("variance ratio moments: closed forms in the scalar case") {
  // g = n, one dropped coordinate, zero dropped mean
  const int n = 25;
  const NigPrior prior = proper_nig(Eigen::VectorXd::Zero(1), 25.0, 5.0, 1.0);
  const auto m = variance_ratio_moments(prior, ModelId(), mean_model_design(n));
  CHECK(m.mean_inv == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.mean == doctest::Approx(0.65568).epsilon(1e-4));
  CHECK(m.complement_mean_zero);
  // E[log R] = -E[log(1 + W)] for W ~ chi2_1, via an independent Simpson oracle
  auto integrand = [](double w) {
    return std::log1p(w) * std::exp(-0.5 * w) / std::sqrt(2.0 * M_PI * w);
  };
  const double want = -oracle::simpson(integrand, 1e-12, 60.0, 400000);
  CHECK(m.mean_log == doctest::Approx(want).epsilon(1e-7));
}

TEST_CASE("variance ratio moments match Monte Carlo (zero and nonzero dropped means)") {
  std::mt19937_64 gen(6);
  for (bool zero_mean : {true, false}) {
    const int n = 10, p = 3;
    const Eigen::MatrixXd X = oracle::random_design(gen, n, p);
    const ModelId model({0, 1});
    Eigen::VectorXd b = zero_mean ? Eigen::VectorXd::Zero(p) : oracle::random_vector(gen, p);
    if (!zero_mean) b(0) = 0.4; // keep the dropped coordinate clearly nonzero
    const double g = 8.0, d = 6.0, a = 3.0;
    const NigPrior prior = proper_nig(b, g, d, a);
    const auto m = variance_ratio_moments(prior, model, X);

    const Eigen::MatrixXd B = [&] {
      const auto pp = projection_pair(X, model);
      return Eigen::MatrixXd(X.transpose() * pp.M * X / n);
    }();
    const Eigen::MatrixXd L =
        Eigen::LLT<Eigen::MatrixXd>((X.transpose() * X).inverse()).matrixL();
    oracle::MeanAccumulator inv, mean_r, var_helper, log_r;
    for (int i = 0; i < 1000000; ++i) {
      const double s2 = oracle::draw_inv_gamma_halves(gen, d, a);
      const Eigen::VectorXd beta = oracle::draw_coefficients(gen, b, L, g, s2);
      const double q = beta.dot(B * beta);
      const double r_inv = 1.0 + q / s2;
      inv.add(r_inv);
      var_helper.add(r_inv * r_inv);
      mean_r.add(1.0 / r_inv);
      log_r.add(-std::log(r_inv));
    }
    CHECK(std::abs(m.mean_inv - inv.mean()) < 3.0 * inv.se());
    const double mc_var = var_helper.mean() - inv.mean() * inv.mean();
    // delta-method error bars for the variance estimate
    const double var_se = std::sqrt(var_helper.variance() / var_helper.count) +
                          2.0 * std::abs(inv.mean()) * inv.se();
    CHECK(std::abs(m.var_inv - mc_var) < 4.0 * var_se);
    if (zero_mean) {
      CHECK(std::abs(m.mean - mean_r.mean()) < 3.0 * mean_r.se());
      CHECK(std::abs(m.mean_log - log_r.mean()) < 3.0 * log_r.se());
    } else {
      // first-order approximation only; record that it is biased but close
      CHECK(m.mean == doctest::Approx(mean_r.mean()).epsilon(0.2));
      CHECK(std::isnan(m.mean_log));
    }
  }
}

TEST_CASE("standard derivation restricts the mean and keeps the scale") {
  const Dataset data = correlated_fixture();
  std::mt19937_64 gen(7);
  const Eigen::VectorXd b = oracle::random_vector(gen, 4);
  const NigPrior full_prior = proper_nig(b, 6.0, 5.0, 2.0);

  const DerivedPrior same = derive_standard(full_prior, ModelId::full(4), data.X);
  CHECK((same.prior.b - b).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(same.prior.d == 5.0);
  CHECK(same.prior.a == 2.0);

  const DerivedPrior sub = derive_standard(full_prior, ModelId({0, 1}), data.X);
  CHECK(sub.prior.d == 5.0);
  CHECK(sub.prior.a == 2.0);
  CHECK(sub.prior.g == 6.0);

  const DerivedPrior imp = derive_improper(full_prior, ModelId({0, 1}), data.X);
  CHECK(imp.prior.d == 0.0);
  CHECK(imp.prior.a == 0.0);
  CHECK_FALSE(imp.prior.proper);
  CHECK((imp.prior.b - sub.prior.b).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("conditioning on the location model of the mean model") {
  const NigPrior prior = proper_nig(Eigen::VectorXd::Zero(1), 25.0, 5.0, 1.0);
  const DerivedPrior uc = derive_uc(prior, ModelId(), mean_model_design(25));
  CHECK(uc.prior.d == doctest::Approx(6.0));
  CHECK(uc.prior.a == doctest::Approx(1.0));
  CHECK(uc.prior.g == 25.0);
}

TEST_CASE("conditioning on a centered regression") {
  Eigen::MatrixXd X(3, 2);
  X << 1, -1, 1, 0, 1, 1;
  Eigen::VectorXd b(2);
  b << 1.0, 2.0;
  const NigPrior prior = proper_nig(b, 2.0, 3.0, 1.5);
  const DerivedPrior uc = derive_uc(prior, ModelId::intercept_only(), X);
  // centered slope column: restricted mean is the intercept coordinate and
  // the quadratic is beta1^2 sum x^2 = 8
  CHECK(uc.prior.b(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(uc.prior.d == doctest::Approx(4.0));
  CHECK(uc.prior.a == doctest::Approx(1.5 + 8.0));
}

TEST_CASE("conditioning keeps a when the dropped means vanish") {
  const Dataset data = correlated_fixture();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(4);
  b(0) = 2.2;
  const NigPrior prior = proper_nig(b, 5.0, 4.0, 3.0);
  double prev_mean_sigma2 = 1e300;
  for (const auto& model : {ModelId({0, 1, 2}), ModelId({0, 1}), ModelId({0})}) {
    const DerivedPrior uc = derive_uc(prior, model, data.X);
    CHECK(uc.prior.a == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(uc.prior.d == doctest::Approx(4.0 + 4 - model.size()));
    const double mean_sigma2 = uc.prior.a / (uc.prior.d - 2.0);
    CHECK(mean_sigma2 < prev_mean_sigma2);
    prev_mean_sigma2 = mean_sigma2;
  }
  CHECK_THROWS_AS(derive_uc(improper_nig(b, 5.0), ModelId({0, 1}), data.X), NumericError);
}

TEST_CASE("conditioning inflates a strictly for nonzero dropped means") {
  // With a full-column-rank design, X_c b_c lies in the span of X_k only
  // when b_c = 0, so the quadratic increment vanishes exactly there.
  const Dataset data = correlated_fixture();
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd b = oracle::random_vector(gen, 4);
    const NigPrior prior = proper_nig(b, 3.0, 4.0, 2.0);
    const DerivedPrior uc = derive_uc(prior, ModelId({0, 1}), data.X);
    const Eigen::VectorXd bc = complement_vector(b, ModelId({0, 1}));
    if (bc.lpNorm<Eigen::Infinity>() > 1e-8) {
      CHECK(uc.prior.a > 2.0);
    }
  }
}

TEST_CASE("conditioned prior density is proportional to the joint at the constraint") {
  // With zero dropped means the derived prior is exactly the conditional of
  // the full prior, so their log densities differ by a constant.
  const Dataset data = correlated_fixture();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(4);
  b(0) = -0.7;
  const double g = 4.0, d = 5.0, a = 2.0;
  const NigPrior prior = proper_nig(b, g, d, a);
  const ModelId model({0, 2});
  const DerivedPrior uc = derive_uc(prior, model, data.X);
  const Eigen::MatrixXd xtx_full = data.X.transpose() * data.X;
  const Eigen::MatrixXd Xk = submodel_matrix(data.X, model);
  const Eigen::MatrixXd xtx_k = Xk.transpose() * Xk;

  std::mt19937_64 gen(8);
  double reference = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd beta_k = oracle::random_vector(gen, 2, 1.5);
    const double s2 = 0.2 + 2.0 * std::abs(oracle::random_vector(gen, 1)(0));
    const double lhs = log_nig_density(beta_k, s2, uc.prior.b, uc.prior.g, xtx_k, uc.prior.d,
                                       uc.prior.a);
    const double rhs =
        log_nig_density(scatter(beta_k, model, 4), s2, b, g, xtx_full, d, a);
    const double ratio = lhs - rhs;
    if (trial == 0) reference = ratio;
    CHECK(ratio == doctest::Approx(reference).epsilon(1e-10));
  }
}

TEST_CASE("jeffreys conditioning restores the shape and matches its definition") {
  const Dataset data = correlated_fixture();
  std::mt19937_64 gen(9);
  const Eigen::VectorXd b = oracle::random_vector(gen, 4);
  const double g = 7.0, d = 4.0, a = 2.5;
  const NigPrior prior = proper_nig(b, g, d, a);

  const DerivedPrior same = derive_jc(prior, ModelId::full(4), data.X);
  CHECK(same.prior.d == d);
  CHECK(same.prior.a == doctest::Approx(a));
  CHECK((same.prior.b - b).lpNorm<Eigen::Infinity>() < 1e-12);

  for (const auto& model : {ModelId({0}), ModelId({0, 1}), ModelId({0, 2, 3})}) {
    const DerivedPrior jc = derive_jc(prior, model, data.X);
    const DerivedPrior uc = derive_uc(prior, model, data.X);
    CHECK(jc.prior.d == doctest::Approx(d)); // shape restored for every submodel
    CHECK(jc.prior.a == doctest::Approx(uc.prior.a));

    // pointwise: jc density = uc density * jeffreys ratio, up to a constant;
    // the ratio comes from explicit Fisher determinants sigma^-(p+2) and
    // sigma^-(p_k+2).
    const Eigen::MatrixXd Xk = submodel_matrix(data.X, model);
    const Eigen::MatrixXd xtx_k = Xk.transpose() * Xk;
    double reference = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd beta_k = oracle::random_vector(gen, model.size(), 1.2);
      const double s2 = 0.3 + std::abs(oracle::random_vector(gen, 1)(0));
      const double log_jc =
          log_nig_density(beta_k, s2, jc.prior.b, jc.prior.g, xtx_k, jc.prior.d, jc.prior.a);
      const double log_uc =
          log_nig_density(beta_k, s2, uc.prior.b, uc.prior.g, xtx_k, uc.prior.d, uc.prior.a);
      const double jeffreys_ratio = 0.5 * (4 - model.size()) * std::log(s2);
      const double r = log_jc - (log_uc + jeffreys_ratio);
      if (trial == 0) reference = r;
      CHECK(r == doctest::Approx(reference).epsilon(1e-8));
    }
  }
}

TEST_CASE("mean-structure projection keeps the variance hyperparameters") {
  const Dataset data = correlated_fixture();
  std::mt19937_64 gen(10);
  const Eigen::VectorXd b = oracle::random_vector(gen, 4);
  const NigPrior prior = proper_nig(b, 3.0, 6.0, 2.0);
  for (const auto& model : {ModelId({0}), ModelId({0, 3}), ModelId({0, 1, 2})}) {
    const DerivedPrior klc = derive_kl_conditional(prior, model, data.X);
    const DerivedPrior uc = derive_uc(prior, model, data.X);
    CHECK((klc.prior.b - uc.prior.b).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(klc.prior.d == 6.0);
    CHECK(klc.prior.a == 2.0);
    CHECK(klc.prior.g == 3.0);
  }
  // orthogonal blocks: the projected mean is the plain subvector
  Eigen::MatrixXd O(4, 3);
  O << 1, -3, 1, 1, -1, -1, 1, 1, -1, 1, 3, 1;
  Eigen::VectorXd bo(3);
  bo << 0.5, 1.0, -2.0;
  const DerivedPrior klo = derive_kl_conditional(proper_nig(bo, 2.0, 4.0, 4.0), ModelId({0, 1}), O);
  CHECK(klo.prior.b(0) == doctest::Approx(0.5));
  CHECK(klo.prior.b(1) == doctest::Approx(1.0));
}

TEST_CASE("projected coefficients given sigma2 are Gaussian with the g-prior covariance") {
  // Monte Carlo check of the conditional covariance g sigma2 (X_k'X_k)^{-1}
  std::mt19937_64 gen(11);
  const Eigen::MatrixXd X = oracle::random_design(gen, 10, 3);
  const ModelId model({0, 1});
  const Eigen::VectorXd b = oracle::random_vector(gen, 3);
  const double g = 5.0, sigma2 = 1.7;
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>((X.transpose() * X).inverse()).matrixL();
  const ModelBasis basis(X, model);

  const int draws = 1000000;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sum_sq = Eigen::Matrix2d::Zero();
  oracle::MeanAccumulator fourth; // standardized fourth moment of one coordinate
  const double want_var0 = g * sigma2 * basis.solve_xtx(Eigen::MatrixXd::Identity(2, 2))(0, 0);
  const double want_mean0 = derive_uc(proper_nig(b, g, 5.0, 5.0), model, X).prior.b(0);
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXd beta = oracle::draw_coefficients(gen, b, L, g, sigma2);
    const Eigen::Vector2d proj = basis.solve_ls(X * beta);
    sum += proj;
    sum_sq += proj * proj.transpose();
    const double z = (proj(0) - want_mean0) / std::sqrt(want_var0);
    fourth.add(z * z * z * z);
  }
  const Eigen::Vector2d mean = sum / draws;
  const Eigen::Matrix2d cov = sum_sq / draws - mean * mean.transpose();
  const Eigen::Matrix2d want =
      g * sigma2 * basis.solve_xtx(Eigen::MatrixXd::Identity(2, 2));
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double se =
          std::sqrt((want(i, i) * want(j, j) + want(i, j) * want(i, j)) / draws);
      CHECK(std::abs(cov(i, j) - want(i, j)) < 4.0 * se);
    }
  }
  // Gaussian kurtosis as a normality proxy
  CHECK(std::abs(fourth.mean() - 3.0) < 4.0 * fourth.se());
}

TEST_CASE("conjugate fit to the projection prior: reference triples") {
  const Eigen::MatrixXd X = mean_model_design(25);
  const double g = 25.0;
  const struct {
    double d, a, want_d, want_a;
  } cases[] = {{1, 1, 0.93, 1.42}, {5, 1, 3.38, 1.03}, {3, 25, 2.36, 29.98}};
  for (const auto& c : cases) {
    const DerivedPrior kl =
        derive_kl_conjugate(proper_nig(Eigen::VectorXd::Zero(1), g, c.d, c.a), ModelId(), X);
    CHECK(std::abs(kl.prior.d - c.want_d) < 0.01);
    CHECK(std::abs(kl.prior.a - c.want_a) < 0.01);
    CHECK(std::abs(kl.diagnostics.at("solver_residual")) <= 1e-10);
  }
}

TEST_CASE("conjugate fit leaves the full model untouched") {
  const Dataset data = correlated_fixture();
  std::mt19937_64 gen(12);
  const Eigen::VectorXd b = oracle::random_vector(gen, 4);
  const NigPrior prior = proper_nig(b, 3.0, 4.0, 5.0);
  const DerivedPrior kl = derive_kl_conjugate(prior, ModelId::full(4), data.X);
  CHECK((kl.prior.b - b).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(kl.prior.d == 4.0);
  CHECK(kl.prior.a == 5.0);
  CHECK(kl.prior.g == 3.0);
}

TEST_CASE("conjugate fit shrinks the shape and the scale for zero dropped means") {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd X = oracle::random_design(gen, 8, 4);
    const double g = 1.0 + 10.0 * std::abs(oracle::random_vector(gen, 1)(0));
    const double d = 0.5 + 8.0 * std::abs(oracle::random_vector(gen, 1)(0));
    const double a = 0.5 + 8.0 * std::abs(oracle::random_vector(gen, 1)(0));
    const NigPrior prior = proper_nig(Eigen::VectorXd::Zero(4), g, d, a);
    const ModelId model({0, 1});
    const DerivedPrior kl = derive_kl_conjugate(prior, model, X);
    CHECK(kl.prior.d < d);
    CHECK(kl.prior.g <= g + 1e-12);
    CHECK(std::abs(kl.diagnostics.at("solver_residual")) <= 1e-10);
  }
}

TEST_CASE("projected precision mean shrinks for arbitrary dropped means") {
  // E(1/sigma_k^2) = d_kl/a_kl < d/a
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 3 + (trial % 3);
    const Eigen::MatrixXd X = oracle::random_design(gen, 12, p);
    const Eigen::VectorXd b = oracle::random_vector(gen, p);
    const double g = 0.5 + 12.0 * std::abs(oracle::random_vector(gen, 1)(0));
    const double d = 0.5 + 9.0 * std::abs(oracle::random_vector(gen, 1)(0));
    const double a = 0.5 + 9.0 * std::abs(oracle::random_vector(gen, 1)(0));
    const NigPrior prior = proper_nig(b, g, d, a);
    const DerivedPrior kl = derive_kl_conjugate(prior, ModelId({0, 1}), X);
    CHECK(kl.prior.d / kl.prior.a < d / a + 1e-12);
  }
}

TEST_CASE("sampling the projection prior") {
  std::mt19937_64 gen(15);
  const Eigen::MatrixXd X = oracle::random_design(gen, 10, 3);
  const ModelId model({0, 1});
  Eigen::VectorXd b(3);
  b << 0.5, -0.3, 0.8;
  const NigPrior prior = proper_nig(b, 4.0, 6.0, 3.0);

  const auto draws = sample_kl_prior(prior, model, X, 2000, 99);
  const auto again = sample_kl_prior(prior, model, X, 2000, 99);
  REQUIRE(draws.size() == 2000);
  CHECK((draws[17].beta_perp - again[17].beta_perp).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(draws[1234].sigma2_perp == again[1234].sigma2_perp);
  for (const auto& pt : draws) CHECK(pt.sigma2_perp > 0.0);

  // mean of the projected coefficients converges to the restricted mean
  const auto big = sample_kl_prior(prior, model, X, 400000, 7);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& pt : big) mean += pt.beta_perp;
  mean /= static_cast<double>(big.size());
  const Eigen::VectorXd want = derive_uc(prior, model, X).prior.b;
  // crude 3-sigma band from the prior coefficient spread
  Eigen::Vector2d sd = Eigen::Vector2d::Zero();
  for (const auto& pt : big) sd += (pt.beta_perp - mean).cwiseAbs2();
  sd = (sd / big.size()).cwiseSqrt() / std::sqrt(static_cast<double>(big.size()));
  CHECK(std::abs(mean(0) - want(0)) < 3.5 * sd(0));
  CHECK(std::abs(mean(1) - want(1)) < 3.5 * sd(1));

  // projection inflates the variance: sigma2_perp >= sigma2 for any draw of
  // the projection map itself
  for (int i = 0; i < 100; ++i) {
    const double s2 = 0.1 + i * 0.05;
    const Eigen::VectorXd beta = oracle::random_vector(gen, 3, 2.0);
    CHECK(kl_project(beta, s2, model, X).sigma2_perp >= s2);
  }
}

TEST_CASE("sampled variance-ratio statistics agree with the closed forms") {
  std::mt19937_64 gen(16);
  const Eigen::MatrixXd X = oracle::random_design(gen, 10, 3);
  const ModelId model({0, 2});
  Eigen::VectorXd b(3);
  b << 0.2, 0.9, -0.6;
  const NigPrior prior = proper_nig(b, 6.0, 5.0, 2.0);
  const auto m = variance_ratio_moments(prior, model, X);

  // R = sigma2 / sigma2_perp accumulated through the exact sampler; the
  // sampler does not expose sigma2, so draw it here and apply the projection
  // map directly.
  oracle::MeanAccumulator inv_acc;
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>((X.transpose() * X).inverse()).matrixL();
  for (int i = 0; i < 1000000; ++i) {
    const double s2 = oracle::draw_inv_gamma_halves(gen, 5.0, 2.0);
    const Eigen::VectorXd beta = oracle::draw_coefficients(gen, b, L, 6.0, s2);
    inv_acc.add(kl_project(beta, s2, model, X).sigma2_perp / s2);
  }
  CHECK(std::abs(m.mean_inv - inv_acc.mean()) < 3.0 * inv_acc.se());
}

TEST_CASE("marginalization diagnostic") {
  // orthogonal design: the marginalized covariance IS the g-prior covariance
  Eigen::MatrixXd O(4, 3);
  O << 1, -3, 1, 1, -1, -1, 1, 1, -1, 1, 3, 1;
  Eigen::VectorXd bo = Eigen::VectorXd::Zero(3);
  const auto ortho =
      marginalization_diagnostic(proper_nig(bo, 2.0, 4.0, 4.0), ModelId({0, 1}), O);
  CHECK(ortho.max_discrepancy < 1e-12);
  // columns already centered and zero mean: recentering changes nothing
  CHECK(ortho.intercept_mean_before == doctest::Approx(ortho.intercept_mean_after));
  CHECK(ortho.intercept_var_factor_before ==
        doctest::Approx(ortho.intercept_var_factor_after).epsilon(1e-12));

  // correlated cement predictors: marginalization leaves the family
  const Dataset hald = load_dataset(DATA_DIR "/hald.csv");
  std::mt19937_64 gen(17);
  const Eigen::VectorXd b = oracle::random_vector(gen, 5);
  const auto rep =
      marginalization_diagnostic(proper_nig(b, 13.0, 25.0, 125.0), ModelId({0, 1, 2}), hald.X);
  CHECK(rep.max_discrepancy > 1e-6);
  // uncentered dropped column: the implied intercept prior changes
  CHECK(std::abs(rep.intercept_mean_before - rep.intercept_mean_after) > 1e-8);
  CHECK(std::abs(rep.intercept_var_factor_before - rep.intercept_var_factor_after) > 1e-8);
}

TEST_CASE("nested coherence of the conditioning procedures") {
  std::mt19937_64 gen(18);
  for (int trial = 0; trial < 25; ++trial) {
    const int p = 4 + (trial % 2);
    const Eigen::MatrixXd X = oracle::random_design(gen, 14, p);
    const Eigen::VectorXd b = oracle::random_vector(gen, p);
    const NigPrior prior = proper_nig(b, 2.0 + trial, 3.5, 2.0);
    const ModelId mid({0, 1, 2});
    const ModelId small({0, 1});
    for (const auto kind : {ProcedureKind::UC, ProcedureKind::JC, ProcedureKind::Standard,
                            ProcedureKind::KLConditional}) {
      const auto rep = check_nested_coherence(prior, mid, small, X, kind);
      CHECK(rep.max_gap() < 1e-12);
    }
  }
}

TEST_CASE("nested coherence of the conjugate projection fails on the variance side") {
  const Dataset data = correlated_fixture();
  std::mt19937_64 gen(19);
  Eigen::VectorXd b = oracle::random_vector(gen, 4);
  b(3) = 1.5; // dropped coordinate clearly nonzero
  const NigPrior prior = proper_nig(b, 6.0, 5.0, 3.0);
  const auto rep = check_nested_coherence(prior, ModelId({0, 1, 2}), ModelId({0, 1}), data.X,
                                          ProcedureKind::KLConjugate);
  CHECK(rep.b_gap < 1e-12);
  CHECK(rep.d_gap > 1e-4);
  CHECK(rep.a_gap > 1e-4);
  CHECK_THROWS_AS(
      check_nested_coherence(prior, ModelId({0, 1}), ModelId({0, 2}), data.X, ProcedureKind::UC),
      DataError);
}

TEST_CASE("nuisance coherence of conditioning; incoherence of the others") {
  const Dataset data = correlated_fixture();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(4);
  const NigPrior prior = proper_nig(b, 5.0, 4.0, 3.0);
  const ModelId model = ModelId::intercept_only();

  const auto uc = check_nuisance_coherence(prior, model, data, ProcedureKind::UC);
  CHECK(uc.gap < 1e-8);

  const auto standard = check_nuisance_coherence(prior, model, data, ProcedureKind::Standard);
  CHECK(standard.gap > 1e-4);

  const auto kl = check_nuisance_coherence(prior, model, data, ProcedureKind::KLConjugate);
  CHECK(kl.gap > 1e-4);

  CHECK_THROWS_AS(check_nuisance_coherence(prior, model, data, ProcedureKind::Improper),
                  NumericError);
}

TEST_CASE("derivations from an intermediate base model") {
  const Dataset data = correlated_fixture();
  std::mt19937_64 gen(20);
  const Eigen::VectorXd b = oracle::random_vector(gen, 4);
  const NigPrior prior = proper_nig(b, 4.0, 5.0, 2.0);
  const ModelId mid({0, 1, 3});
  const DerivedPrior on_mid = derive_uc(prior, mid, data.X);
  // deriving from mid with target == mid is the identity
  const DerivedPrior same = derive_prior_from(ProcedureKind::UC, on_mid.prior, mid, mid, data.X);
  CHECK((same.prior.b - on_mid.prior.b).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(same.prior.d == doctest::Approx(on_mid.prior.d));
  CHECK(same.prior.a == doctest::Approx(on_mid.prior.a));
}
