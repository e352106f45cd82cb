#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "gnig/core_model.hpp"

namespace gnig {

/// Normal-inverted-gamma prior in g-parametrized form:
///   beta | sigma^2 ~ N(b, g sigma^2 (X_k^T X_k)^{-1})
///   sigma^2        ~ IGa(d/2, a/2), mean a/(d-2) for d > 2.
/// The improper reference prior on sigma^2 (density 1/sigma^2) is encoded as
/// d = 0, a = 0, proper = false; it only supports operations whose arbitrary
/// constant cancels.
struct NigPrior {
  Eigen::VectorXd b; // length p_k
  double g = 1.0;
  double d = 0.0;
  double a = 0.0;
  bool proper = false;
};

NigPrior proper_nig(Eigen::VectorXd b, double g, double d, double a);
NigPrior improper_nig(Eigen::VectorXd b, double g);

/// Conjugate posterior of (beta, sigma^2) given y. V_n is the
/// sigma^2-relative coefficient covariance scale, so
/// beta | sigma^2, y ~ N(b_n, sigma^2 V_n) and sigma^2 | y ~ IGa(d_n/2, a_n/2).
struct GeneralNigPosterior {
  Eigen::VectorXd b_n;
  Eigen::MatrixXd V_n;
  double d_n = 0.0;
  double a_n = 0.0;
};

enum class PriorMeanKind { zero, ybar, ols, custom };

/// Default choices for the prior coefficient mean of the full model.
struct PriorMeanChoice {
  PriorMeanKind kind = PriorMeanKind::zero;
  std::optional<Eigen::VectorXd> custom_value;

  static PriorMeanChoice zero() { return {PriorMeanKind::zero, std::nullopt}; }
  static PriorMeanChoice ybar() { return {PriorMeanKind::ybar, std::nullopt}; }
  static PriorMeanChoice ols() { return {PriorMeanKind::ols, std::nullopt}; }
  static PriorMeanChoice custom(Eigen::VectorXd v) { return {PriorMeanKind::custom, std::move(v)}; }
};

std::string mean_choice_name(const PriorMeanChoice& choice);

/// Resolves a mean choice against data: zero vector, (ybar, 0, ..., 0),
/// the full-model OLS estimate, or an explicit vector (length-checked).
Eigen::VectorXd resolve_prior_mean(const PriorMeanChoice& choice, const Dataset& data);

/// Mean restriction used by the standard approach:
/// b_k = (X_k^T X_k)^{-1} X_k^T X b.
Eigen::VectorXd restrict_mean_standard(const Eigen::VectorXd& b, const ModelId& model,
                                       const Eigen::MatrixXd& X);

/// Conjugate update of a g-parametrized prior on the given submodel.
/// An improper prior is accepted when n > p_k (the posterior is proper).
GeneralNigPosterior posterior_update(const NigPrior& prior, const Dataset& data,
                                     const ModelId& model);

/// Conjugate update for an arbitrary SPD coefficient scale V.
GeneralNigPosterior posterior_update_general(const Eigen::VectorXd& b, const Eigen::MatrixXd& V,
                                             double d, double a, const Eigen::MatrixXd& Xk,
                                             const Eigen::VectorXd& y);

/// Log marginal density of y under the submodel with a proper gNIGa prior:
/// an n-variate Student t with location X_k b, degrees of freedom d and
/// precision scale (d/a)(I + g P_k)^{-1}. Uses det(I + g P_k) = (1+g)^{p_k}
/// and (I + g P_k)^{-1} = I - g/(1+g) P_k, so the cost is one least-squares
/// solve. Throws for improper priors (only Bayes factors exist there).
double log_marginal_likelihood(const NigPrior& prior, const Dataset& data, const ModelId& model);

/// Same marginal for an arbitrary SPD coefficient scale V (Woodbury route).
double log_marginal_likelihood_general(const Eigen::VectorXd& b, const Eigen::MatrixXd& V,
                                       double d, double a, const Eigen::MatrixXd& Xk,
                                       const Eigen::VectorXd& y);

/// Log density at x of a multivariate Student t with the scale-matrix
/// convention: variance = nu/(nu-2) * scale for nu > 2.
double log_student_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                           const Eigen::MatrixXd& scale, double nu);

/// Shared Student-t kernel given the quadratic form x^T Scale^{-1} x and
/// log det(Scale).
double log_student_kernel(double nu, int dim, double logdet_scale, double quad);

/// Log joint density of (beta, sigma2) under the gNIGa prior with the given
/// Gram matrix xtx = X^T X: N(beta; b, g sigma2 xtx^{-1}) * IGa(sigma2; d/2, a/2).
double log_nig_density(const Eigen::VectorXd& beta, double sigma2, const Eigen::VectorXd& b,
                       double g, const Eigen::MatrixXd& xtx, double d, double a);

} // namespace gnig
