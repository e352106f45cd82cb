#include "gnig/selection.hpp"

#include <cmath>

#include "gnig/errors.hpp"
#include "gnig/special_fn.hpp"

namespace gnig {

namespace {

// log of the model-specific factor of the closed-form Bayes factor; the
// difference of two of these is the log Bayes factor. Written to follow the
// closed form literally: braces = a + g/(1+g) SSR + 1/(1+g) ||y - X_k b||^2.
double log_model_kernel(const NigPrior& prior, const ModelId& model, const Dataset& data) {
  if (prior.b.size() != model.size()) {
    throw DataError("log_bayes_factor: prior mean length must equal p_k");
  }
  const int n = data.n();
  const int pk = model.size();
  const ModelBasis basis(data.X, model);
  const double g = prior.g;
  const double ssr = basis.ssr(data.y);
  const Eigen::VectorXd r =
      (pk == 0) ? data.y : Eigen::VectorXd(data.y - basis.Xk() * prior.b);
  const double braces = prior.a + (g / (1.0 + g)) * ssr + r.squaredNorm() / (1.0 + g);
  double kernel = log_gamma(0.5 * (prior.d + n)) - 0.5 * pk * std::log1p(g) -
                  0.5 * (prior.d + n) * std::log(braces);
  if (prior.proper) {
    kernel += 0.5 * prior.d * std::log(prior.a) - log_gamma(0.5 * prior.d);
  }
  return kernel;
}

} // namespace

double log_bayes_factor(const NigPrior& prior_k, const NigPrior& prior_s, const ModelId& model_k,
                        const ModelId& model_s, const Dataset& data) {
  if (prior_k.proper != prior_s.proper) {
    throw UsageError("log_bayes_factor: cannot compare a proper prior with an improper one");
  }
  if (!prior_k.proper && (prior_k.d != 0.0 || prior_k.a != 0.0 || prior_s.d != 0.0 ||
                          prior_s.a != 0.0)) {
    throw UsageError("log_bayes_factor: improper comparison requires d = a = 0 on both sides");
  }
  return log_model_kernel(prior_k, model_k, data) - log_model_kernel(prior_s, model_s, data);
}

double log_savage_ratio(const NigPrior& full_prior, const ModelId& model, const Dataset& data) {
  if (!full_prior.proper) throw NumericError("log_savage_ratio: requires a proper full prior");
  const int p = data.p();
  if (full_prior.b.size() != p) throw DataError("log_savage_ratio: prior mean length must equal p");
  const ModelId full = ModelId::full(p);
  if (!full.contains_model(model) || model.size() == p) {
    throw DataError("log_savage_ratio: model must be a strict submodel");
  }
  const auto dropped = complement_indices(model, p);
  const int q = static_cast<int>(dropped.size());
  const ModelBasis full_basis(data.X, full);
  const Eigen::MatrixXd C = full_basis.solve_xtx(Eigen::MatrixXd::Identity(p, p));

  auto block = [&dropped, q](const Eigen::MatrixXd& A) {
    Eigen::MatrixXd out(q, q);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) out(i, j) = A(dropped[i], dropped[j]);
    return out;
  };
  auto entries = [&dropped, q](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(q);
    for (int i = 0; i < q; ++i) out(i) = v(dropped[i]);
    return out;
  };

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(q);
  const Eigen::MatrixXd prior_scale =
      (full_prior.a / full_prior.d) * full_prior.g * block(C);
  const double log_prior =
      log_student_density(zero, entries(full_prior.b), prior_scale, full_prior.d);

  const GeneralNigPosterior post = posterior_update(full_prior, data, full);
  const Eigen::MatrixXd post_scale = (post.a_n / post.d_n) * block(post.V_n);
  const double log_post = log_student_density(zero, entries(post.b_n), post_scale, post.d_n);
  return log_post - log_prior;
}

Eigen::VectorXd posterior_model_probs(const BayesFactorMatrix& bfm,
                                      const std::optional<Eigen::VectorXd>& prior_probs) {
  const int m = static_cast<int>(bfm.models.size());
  if (bfm.log_bf_vs_ref.size() != m) {
    throw DataError("posterior_model_probs: log_bf length must match model count");
  }
  Eigen::VectorXd log_post(m);
  if (prior_probs) {
    if (prior_probs->size() != m) throw DataError("posterior_model_probs: prior length mismatch");
    if ((prior_probs->array() < 0.0).any()) {
      throw DataError("posterior_model_probs: negative prior probability");
    }
    const double total = prior_probs->sum();
    if (std::abs(total - 1.0) > 1e-8) {
      throw DataError("posterior_model_probs: prior probabilities must sum to 1");
    }
    for (int i = 0; i < m; ++i) {
      log_post(i) = ((*prior_probs)(i) > 0.0 ? std::log((*prior_probs)(i)) : -1e300) +
                    bfm.log_bf_vs_ref(i);
    }
  } else {
    log_post = bfm.log_bf_vs_ref;
  }
  const double shift = log_post.maxCoeff();
  Eigen::VectorXd probs = (log_post.array() - shift).exp();
  probs /= probs.sum();
  return probs;
}

GGScore gelfand_ghosh(const NigPrior& prior, const ModelId& model, const Dataset& data, double c) {
  if (!(c > 0.0)) throw UsageError("gelfand_ghosh: c must be positive");
  const GeneralNigPosterior post = posterior_update(prior, data, model);
  if (!(post.d_n > 2.0)) {
    throw NumericError("gelfand_ghosh: d_n <= 2 gives infinite predictive variance");
  }
  const int n = data.n();
  const Eigen::MatrixXd Xk = submodel_matrix(data.X, model);
  const Eigen::VectorXd mu =
      model.size() == 0 ? Eigen::VectorXd::Zero(n) : Eigen::VectorXd(Xk * post.b_n);
  const double sigma_base = post.a_n / (post.d_n - 2.0);
  GGScore score;
  score.c = c;
  score.G = (mu - data.y).squaredNorm();
  score.P = 0.0;
  for (int i = 0; i < n; ++i) {
    double leverage = 0.0;
    if (model.size() > 0) {
      const Eigen::VectorXd xi = Xk.row(i).transpose();
      leverage = xi.dot(post.V_n * xi);
    }
    score.P += sigma_base * (1.0 + leverage);
  }
  score.D = c / (c + 1.0) * score.G + score.P;
  return score;
}

ParadoxProbe info_paradox_probe(ProcedureKind kind, const PriorMeanChoice& mean_choice,
                                const Dataset& base_data, const ModelId& model,
                                const std::vector<double>& scales, double g, double d, double a) {
  if (scales.empty()) throw UsageError("info_paradox_probe: need at least one scale");
  const ModelBasis basis(base_data.X, model);
  const Eigen::VectorXd signal = basis.project(base_data.y);
  const Eigen::VectorXd noise = basis.residual(base_data.y);
  if (signal.norm() == 0.0) {
    throw DataError("info_paradox_probe: base response has no component in the submodel span");
  }
  const ModelId null_model = ModelId::intercept_only();

  ParadoxProbe probe;
  probe.scales = scales;
  for (double s : scales) {
    if (!(s > 0.0)) throw UsageError("info_paradox_probe: scales must be positive");
    Dataset data = base_data;
    data.y = s * signal + noise / s;
    const Eigen::VectorXd b = resolve_prior_mean(mean_choice, data);
    const NigPrior full_prior =
        kind == ProcedureKind::Improper ? improper_nig(b, g) : proper_nig(b, g, d, a);
    const DerivedPrior prior_k = derive_prior(kind, full_prior, model, data.X);
    const DerivedPrior prior_0 = derive_prior(kind, full_prior, null_model, data.X);
    probe.log_bf.push_back(
        log_bayes_factor(prior_k.prior, prior_0.prior, model, null_model, data));
    probe.derived_a.push_back(prior_k.prior.a);
  }

  const auto& v = probe.log_bf;
  const std::size_t m = v.size();
  bool last_three_close = false;
  if (m >= 3) {
    last_three_close =
        std::abs(v[m - 1] - v[m - 2]) < 0.1 && std::abs(v[m - 2] - v[m - 3]) < 0.1;
  }
  bool tail_growing = true;
  int tail_points = 0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (probe.scales[i] >= 1e3) {
      ++tail_points;
      if (v[i + 1] - v[i] <= 0.1) tail_growing = false;
    }
  }
  if (tail_points == 0) tail_growing = false;
  probe.classification = (!last_three_close && tail_growing) ? "diverging" : "bounded";
  return probe;
}

} // namespace gnig
