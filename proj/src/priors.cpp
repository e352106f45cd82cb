#include "gnig/priors.hpp"

#include <cmath>

#include "gnig/errors.hpp"
#include "gnig/special_fn.hpp"

namespace gnig {

NigPrior proper_nig(Eigen::VectorXd b, double g, double d, double a) {
  if (!(g > 0.0)) throw DataError("NigPrior: g must be positive");
  if (!(d > 0.0) || !(a > 0.0)) throw DataError("NigPrior: proper prior needs d > 0 and a > 0");
  return NigPrior{std::move(b), g, d, a, true};
}

NigPrior improper_nig(Eigen::VectorXd b, double g) {
  if (!(g > 0.0)) throw DataError("NigPrior: g must be positive");
  return NigPrior{std::move(b), g, 0.0, 0.0, false};
}

std::string mean_choice_name(const PriorMeanChoice& choice) {
  switch (choice.kind) {
    case PriorMeanKind::zero: return "zero";
    case PriorMeanKind::ybar: return "ybar";
    case PriorMeanKind::ols: return "ols";
    case PriorMeanKind::custom: return "custom";
  }
  return "unknown";
}

Eigen::VectorXd resolve_prior_mean(const PriorMeanChoice& choice, const Dataset& data) {
  const int p = data.p();
  switch (choice.kind) {
    case PriorMeanKind::zero:
      return Eigen::VectorXd::Zero(p);
    case PriorMeanKind::ybar: {
      Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
      b(0) = data.y.mean();
      return b;
    }
    case PriorMeanKind::ols:
      return ols_fit(data, ModelId::full(p)).beta_hat;
    case PriorMeanKind::custom: {
      if (!choice.custom_value) throw DataError("resolve_prior_mean: custom mean missing its value");
      if (choice.custom_value->size() != p) {
        throw DataError("resolve_prior_mean: custom mean length must equal p");
      }
      return *choice.custom_value;
    }
  }
  throw DataError("resolve_prior_mean: unknown mean kind");
}

Eigen::VectorXd restrict_mean_standard(const Eigen::VectorXd& b, const ModelId& model,
                                       const Eigen::MatrixXd& X) {
  if (b.size() != X.cols()) throw DataError("restrict_mean_standard: b length must equal p");
  const ModelBasis basis(X, model);
  return basis.solve_ls(X * b);
}

GeneralNigPosterior posterior_update_general(const Eigen::VectorXd& b, const Eigen::MatrixXd& V,
                                             double d, double a, const Eigen::MatrixXd& Xk,
                                             const Eigen::VectorXd& y) {
  const int pk = static_cast<int>(Xk.cols());
  const int n = static_cast<int>(y.size());
  GeneralNigPosterior post;
  post.d_n = d + n;
  if (pk == 0) {
    post.b_n = Eigen::VectorXd(0);
    post.V_n = Eigen::MatrixXd(0, 0);
    post.a_n = a + y.squaredNorm();
    return post;
  }
  if (b.size() != pk || V.rows() != pk || V.cols() != pk) {
    throw DataError("posterior_update_general: dimension mismatch");
  }
  const Eigen::LLT<Eigen::MatrixXd> Vllt(V);
  if (Vllt.info() != Eigen::Success) throw NumericError("posterior_update_general: V not SPD");
  const Eigen::MatrixXd Vinv = Vllt.solve(Eigen::MatrixXd::Identity(pk, pk));
  const Eigen::MatrixXd A = Vinv + Xk.transpose() * Xk;
  const Eigen::LLT<Eigen::MatrixXd> Allt(A);
  post.b_n = Allt.solve(Vinv * b + Xk.transpose() * y);
  post.V_n = Allt.solve(Eigen::MatrixXd::Identity(pk, pk));
  post.V_n = 0.5 * (post.V_n + post.V_n.transpose().eval());
  post.a_n = a + y.squaredNorm() + b.dot(Vinv * b) - post.b_n.dot(A * post.b_n);
  if (!(post.a_n > 0.0)) throw NumericError("posterior_update_general: nonpositive posterior scale");
  return post;
}

GeneralNigPosterior posterior_update(const NigPrior& prior, const Dataset& data,
                                     const ModelId& model) {
  const int pk = model.size();
  if (prior.b.size() != pk) throw DataError("posterior_update: prior mean length must equal p_k");
  if (!prior.proper && data.n() <= pk) {
    throw NumericError("posterior_update: improper prior with n <= p_k gives an improper posterior");
  }
  const Eigen::MatrixXd Xk = submodel_matrix(data.X, model);
  if (pk == 0) {
    return posterior_update_general(prior.b, Eigen::MatrixXd(0, 0), prior.d, prior.a, Xk, data.y);
  }
  const ModelBasis basis(data.X, model);
  const Eigen::MatrixXd V = prior.g * basis.solve_xtx(Eigen::MatrixXd::Identity(pk, pk));
  return posterior_update_general(prior.b, 0.5 * (V + V.transpose().eval()), prior.d, prior.a, Xk,
                                  data.y);
}

double log_student_kernel(double nu, int dim, double logdet_scale, double quad) {
  return log_gamma(0.5 * (nu + dim)) - log_gamma(0.5 * nu) -
         0.5 * dim * std::log(nu * M_PI) - 0.5 * logdet_scale -
         0.5 * (nu + dim) * std::log1p(quad / nu);
}

double log_student_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                           const Eigen::MatrixXd& scale, double nu) {
  const int dim = static_cast<int>(x.size());
  if (mu.size() != dim || scale.rows() != dim || scale.cols() != dim) {
    throw DataError("log_student_density: dimension mismatch");
  }
  if (!(nu > 0.0)) throw NumericError("log_student_density: nu must be positive");
  const Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success) throw NumericError("log_student_density: scale not SPD");
  double logdet = 0.0;
  for (int i = 0; i < dim; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  const Eigen::VectorXd z = x - mu;
  const double quad = z.dot(llt.solve(z));
  return log_student_kernel(nu, dim, logdet, quad);
}

double log_nig_density(const Eigen::VectorXd& beta, double sigma2, const Eigen::VectorXd& b,
                       double g, const Eigen::MatrixXd& xtx, double d, double a) {
  if (!(sigma2 > 0.0)) throw NumericError("log_nig_density: sigma2 must be positive");
  if (!(d > 0.0) || !(a > 0.0)) throw NumericError("log_nig_density: needs a proper prior");
  const int p = static_cast<int>(beta.size());
  if (b.size() != p || xtx.rows() != p || xtx.cols() != p) {
    throw DataError("log_nig_density: dimension mismatch");
  }
  double log_norm = 0.0;
  double quad = 0.0;
  if (p > 0) {
    const Eigen::LLT<Eigen::MatrixXd> llt(xtx);
    if (llt.info() != Eigen::Success) throw NumericError("log_nig_density: xtx not SPD");
    double logdet_xtx = 0.0;
    for (int i = 0; i < p; ++i) logdet_xtx += 2.0 * std::log(llt.matrixL()(i, i));
    const Eigen::VectorXd z = beta - b;
    quad = z.dot(xtx * z) / (g * sigma2);
    log_norm = -0.5 * p * std::log(2.0 * M_PI * g * sigma2) + 0.5 * logdet_xtx;
  }
  const double log_iga = 0.5 * d * std::log(0.5 * a) - log_gamma(0.5 * d) -
                         (0.5 * d + 1.0) * std::log(sigma2) - 0.5 * a / sigma2;
  return log_norm - 0.5 * quad + log_iga;
}

double log_marginal_likelihood(const NigPrior& prior, const Dataset& data, const ModelId& model) {
  if (!prior.proper) {
    throw NumericError(
        "log_marginal_likelihood: improper prior has no normalized marginal; use bayes_factor");
  }
  if (prior.b.size() != model.size()) {
    throw DataError("log_marginal_likelihood: prior mean length must equal p_k");
  }
  const int n = data.n();
  const int pk = model.size();
  const ModelBasis basis(data.X, model);
  const Eigen::VectorXd r = (pk == 0) ? data.y : Eigen::VectorXd(data.y - basis.Xk() * prior.b);
  const double ssr = basis.ssr(data.y); // M_k r = M_k y
  const double proj2 = std::max(0.0, r.squaredNorm() - ssr);
  const double S = ssr + proj2 / (1.0 + prior.g);
  const double d = prior.d;
  const double a = prior.a;
  return log_gamma(0.5 * (d + n)) - log_gamma(0.5 * d) - 0.5 * n * std::log(M_PI) +
         0.5 * d * std::log(a) - 0.5 * pk * std::log1p(prior.g) -
         0.5 * (d + n) * std::log(a + S);
}

double log_marginal_likelihood_general(const Eigen::VectorXd& b, const Eigen::MatrixXd& V,
                                       double d, double a, const Eigen::MatrixXd& Xk,
                                       const Eigen::VectorXd& y) {
  if (!(d > 0.0) || !(a > 0.0)) {
    throw NumericError("log_marginal_likelihood_general: needs a proper prior");
  }
  const int n = static_cast<int>(y.size());
  const int pk = static_cast<int>(Xk.cols());
  double logdet_core = 0.0; // log det(I + Xk V Xk^T)
  double quad_core;         // r^T (I + Xk V Xk^T)^{-1} r
  if (pk == 0) {
    quad_core = y.squaredNorm();
  } else {
    const Eigen::VectorXd r = y - Xk * b;
    const Eigen::LLT<Eigen::MatrixXd> Vllt(V);
    if (Vllt.info() != Eigen::Success) {
      throw NumericError("log_marginal_likelihood_general: V not SPD");
    }
    const Eigen::MatrixXd Vinv = Vllt.solve(Eigen::MatrixXd::Identity(pk, pk));
    const Eigen::MatrixXd A = Vinv + Xk.transpose() * Xk;
    const Eigen::LLT<Eigen::MatrixXd> Allt(A);
    for (int i = 0; i < pk; ++i) {
      logdet_core += 2.0 * std::log(Vllt.matrixL()(i, i)) + 2.0 * std::log(Allt.matrixL()(i, i));
    }
    const Eigen::VectorXd xtr = Xk.transpose() * r;
    quad_core = r.squaredNorm() - xtr.dot(Allt.solve(xtr));
  }
  // Scale matrix (a/d)(I + Xk V Xk^T).
  const double logdet_scale = n * std::log(a / d) + logdet_core;
  const double quad = (d / a) * quad_core;
  return log_student_kernel(d, n, logdet_scale, quad);
}

} // namespace gnig
