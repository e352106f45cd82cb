#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gnig {

/// Regression data for the encompassing linear model. Column 0 of X is the
/// intercept (all ones); X has full column rank.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> predictor_names;

  int n() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(X.cols()); }
};

/// Validates the invariants (n >= p >= 1, unit intercept column, full column
/// rank with tolerance 1e-10 on the singular value ratio) and fills default
/// predictor names when none are given.
Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X,
                     std::vector<std::string> predictor_names = {});

/// A submodel: the sorted set of design-matrix columns it retains.
///
/// Every model produced by enumeration contains column 0 (the intercept).
/// The empty set is also admitted; it denotes the variance-only submodel with
/// no regression coefficients at all, which arises when testing a location
/// model against pure noise.
class ModelId {
public:
  ModelId() = default;
  explicit ModelId(std::vector<int> included);

  static ModelId intercept_only() { return ModelId({0}); }
  static ModelId full(int p);

  const std::vector<int>& included() const { return included_; }
  int size() const { return static_cast<int>(included_.size()); }
  bool empty() const { return included_.empty(); }
  bool contains(int column) const;
  bool contains_model(const ModelId& sub) const;

  /// "null" for the intercept-only model, "none" for the empty model,
  /// otherwise predictor indices joined with '+', e.g. "1+2+4".
  std::string label() const;

  bool operator==(const ModelId& other) const { return included_ == other.included_; }
  bool operator!=(const ModelId& other) const { return !(*this == other); }
  bool operator<(const ModelId& other) const { return included_ < other.included_; }

private:
  std::vector<int> included_;
};

/// All 2^(p-1) submodels that keep the intercept, ordered by size then
/// lexicographically. Throws for p > 25.
std::vector<ModelId> enumerate_models(int p);

/// Columns of X selected by the model, in model order.
Eigen::MatrixXd submodel_matrix(const Eigen::MatrixXd& X, const ModelId& model);

/// Columns of X NOT selected by the model, in ascending order.
Eigen::MatrixXd complement_matrix(const Eigen::MatrixXd& X, const ModelId& model);

/// Entries of a length-p vector selected / not selected by the model.
Eigen::VectorXd subvector(const Eigen::VectorXd& v, const ModelId& model);
Eigen::VectorXd complement_vector(const Eigen::VectorXd& v, const ModelId& model);

std::vector<int> complement_indices(const ModelId& model, int p);

/// Positions of target's columns within base's column list. Requires
/// target to be a subset of base.
ModelId positions_within(const ModelId& target, const ModelId& base);

/// Scatters a model-sized vector into a length-p vector, zero elsewhere.
Eigen::VectorXd scatter(const Eigen::VectorXd& v, const ModelId& model, int p);

/// Cached per-model geometry: the submatrix X_k, its QR factorization, and
/// X_k^T X_k. Projection, residual and least-squares operations all route
/// through the QR factorization; explicit inverses appear nowhere.
/// Immutable after construction.
class ModelBasis {
public:
  ModelBasis(const Eigen::MatrixXd& X, const ModelId& model);

  const ModelId& id() const { return id_; }
  int n() const { return static_cast<int>(Xk_.rows()); }
  int pk() const { return static_cast<int>(Xk_.cols()); }
  const Eigen::MatrixXd& Xk() const { return Xk_; }
  const Eigen::MatrixXd& xtx() const { return xtx_; }

  /// P_k v: orthogonal projection onto the column space of X_k.
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;

  /// M_k v = v - P_k v.
  Eigen::VectorXd residual(const Eigen::VectorXd& v) const;

  /// (X_k^T X_k)^{-1} X_k^T v (least-squares coefficients).
  Eigen::VectorXd solve_ls(const Eigen::VectorXd& v) const;

  /// (X_k^T X_k)^{-1} B for a p_k x m right-hand side.
  Eigen::MatrixXd solve_xtx(const Eigen::MatrixXd& rhs) const;

  /// y^T M_k y.
  double ssr(const Eigen::VectorXd& y) const;

private:
  ModelId id_;
  Eigen::MatrixXd Xk_;
  Eigen::MatrixXd xtx_;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
};

struct OlsFit {
  Eigen::VectorXd beta_hat; // length p_k
  double ssr = 0.0;         // y^T M_k y
};

/// OLS fit of the submodel. Throws SingularDesignError when X_k is
/// numerically rank deficient.
OlsFit ols_fit(const Dataset& data, const ModelId& model);

/// Q_k(beta) = (1/n) beta^T X^T M_k X beta = (1/n) ||M_k X beta||^2.
/// The quadratic lack-of-fit term of the submodel at full-model
/// coefficients beta.
double quad_form_Qk(const Eigen::VectorXd& beta, const ModelId& model, const Eigen::MatrixXd& X);

struct ProjectionPair {
  Eigen::MatrixXd P; // projection onto col(X_k)
  Eigen::MatrixXd M; // I - P
};

/// Materialized projection matrices. Refused for n > 512; use ModelBasis
/// residual/project for large n.
ProjectionPair projection_pair(const Eigen::MatrixXd& X, const ModelId& model);

} // namespace gnig
