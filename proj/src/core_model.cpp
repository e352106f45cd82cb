#include "gnig/core_model.hpp"

#include <algorithm>
#include <set>

#include "gnig/errors.hpp"

namespace gnig {

namespace {

constexpr double kRankTol = 1e-10;

// sigma_min / sigma_max < kRankTol means rank deficient. Zero-column
// matrices are trivially full rank.
void check_full_rank(const Eigen::MatrixXd& A, const std::string& what) {
  if (A.cols() == 0) return;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  if (sv(0) == 0.0 || sv(sv.size() - 1) / sv(0) < kRankTol) {
    throw SingularDesignError(what + ": design matrix is numerically rank deficient");
  }
}

} // namespace

Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X,
                     std::vector<std::string> predictor_names) {
  const int n = static_cast<int>(y.size());
  const int p = static_cast<int>(X.cols());
  if (X.rows() != n) throw DataError("make_dataset: y and X row counts differ");
  if (p < 1) throw DataError("make_dataset: need at least the intercept column");
  if (n < p) throw DataError("make_dataset: need n >= p");
  if ((X.col(0).array() != 1.0).any()) {
    throw DataError("make_dataset: column 0 must be the unit intercept");
  }
  check_full_rank(X, "make_dataset");
  if (predictor_names.empty()) {
    predictor_names.reserve(p);
    predictor_names.push_back("intercept");
    for (int j = 1; j < p; ++j) predictor_names.push_back("x" + std::to_string(j));
  } else if (static_cast<int>(predictor_names.size()) != p) {
    throw DataError("make_dataset: predictor_names length must equal p");
  }
  return Dataset{std::move(y), std::move(X), std::move(predictor_names)};
}

ModelId::ModelId(std::vector<int> included) : included_(std::move(included)) {
  std::sort(included_.begin(), included_.end());
  included_.erase(std::unique(included_.begin(), included_.end()), included_.end());
  if (!included_.empty()) {
    if (included_.front() < 0) throw DataError("ModelId: negative column index");
    if (included_.front() != 0) throw DataError("ModelId: non-empty models must keep the intercept");
  }
}

ModelId ModelId::full(int p) {
  std::vector<int> all(p);
  for (int j = 0; j < p; ++j) all[j] = j;
  return ModelId(std::move(all));
}

bool ModelId::contains(int column) const {
  return std::binary_search(included_.begin(), included_.end(), column);
}

bool ModelId::contains_model(const ModelId& sub) const {
  return std::includes(included_.begin(), included_.end(), sub.included_.begin(),
                       sub.included_.end());
}

std::string ModelId::label() const {
  if (included_.empty()) return "none";
  if (included_.size() == 1) return "null";
  std::string out;
  for (int j : included_) {
    if (j == 0) continue;
    if (!out.empty()) out += '+';
    out += std::to_string(j);
  }
  return out;
}

std::vector<ModelId> enumerate_models(int p) {
  if (p < 1) throw DataError("enumerate_models: p must be >= 1");
  if (p > 25) throw DataError("enumerate_models: p > 25 would enumerate more than 2^24 models");
  const int free = p - 1;
  std::vector<std::vector<int>> by_size;
  std::vector<ModelId> out;
  out.reserve(std::size_t{1} << free);
  // By size, then lexicographic within size.
  for (int size = 0; size <= free; ++size) {
    std::vector<int> combo(size);
    std::function<void(int, int)> rec = [&](int start, int depth) {
      if (depth == size) {
        std::vector<int> cols(combo.begin(), combo.end());
        cols.push_back(0);
        out.emplace_back(std::move(cols));
        return;
      }
      for (int j = start; j < free; ++j) {
        combo[depth] = j + 1;
        rec(j + 1, depth + 1);
      }
    };
    rec(0, 0);
  }
  return out;
}

Eigen::MatrixXd submodel_matrix(const Eigen::MatrixXd& X, const ModelId& model) {
  Eigen::MatrixXd Xk(X.rows(), model.size());
  int c = 0;
  for (int j : model.included()) {
    if (j >= X.cols()) throw DataError("submodel_matrix: column index out of range");
    Xk.col(c++) = X.col(j);
  }
  return Xk;
}

std::vector<int> complement_indices(const ModelId& model, int p) {
  std::vector<int> out;
  for (int j = 0; j < p; ++j) {
    if (!model.contains(j)) out.push_back(j);
  }
  return out;
}

Eigen::MatrixXd complement_matrix(const Eigen::MatrixXd& X, const ModelId& model) {
  const auto idx = complement_indices(model, static_cast<int>(X.cols()));
  Eigen::MatrixXd Xc(X.rows(), idx.size());
  for (std::size_t c = 0; c < idx.size(); ++c) Xc.col(c) = X.col(idx[c]);
  return Xc;
}

Eigen::VectorXd subvector(const Eigen::VectorXd& v, const ModelId& model) {
  Eigen::VectorXd out(model.size());
  int c = 0;
  for (int j : model.included()) {
    if (j >= v.size()) throw DataError("subvector: index out of range");
    out(c++) = v(j);
  }
  return out;
}

Eigen::VectorXd complement_vector(const Eigen::VectorXd& v, const ModelId& model) {
  const auto idx = complement_indices(model, static_cast<int>(v.size()));
  Eigen::VectorXd out(idx.size());
  for (std::size_t c = 0; c < idx.size(); ++c) out(c) = v(idx[c]);
  return out;
}

ModelId positions_within(const ModelId& target, const ModelId& base) {
  if (!base.contains_model(target)) throw DataError("positions_within: target not nested in base");
  std::vector<int> pos;
  pos.reserve(target.size());
  const auto& cols = base.included();
  for (int j : target.included()) {
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    pos.push_back(static_cast<int>(it - cols.begin()));
  }
  return ModelId(std::move(pos));
}

Eigen::VectorXd scatter(const Eigen::VectorXd& v, const ModelId& model, int p) {
  if (v.size() != model.size()) throw DataError("scatter: vector length must match model size");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
  int c = 0;
  for (int j : model.included()) out(j) = v(c++);
  return out;
}

ModelBasis::ModelBasis(const Eigen::MatrixXd& X, const ModelId& model)
    : id_(model), Xk_(submodel_matrix(X, model)) {
  check_full_rank(Xk_, "ModelBasis");
  xtx_ = Xk_.transpose() * Xk_;
  if (pk() > 0) qr_ = Eigen::HouseholderQR<Eigen::MatrixXd>(Xk_);
}

Eigen::VectorXd ModelBasis::project(const Eigen::VectorXd& v) const {
  if (pk() == 0) return Eigen::VectorXd::Zero(v.size());
  return Xk_ * qr_.solve(v);
}

Eigen::VectorXd ModelBasis::residual(const Eigen::VectorXd& v) const {
  if (pk() == 0) return v;
  return v - project(v);
}

Eigen::VectorXd ModelBasis::solve_ls(const Eigen::VectorXd& v) const {
  if (pk() == 0) return Eigen::VectorXd(0);
  return qr_.solve(v);
}

Eigen::MatrixXd ModelBasis::solve_xtx(const Eigen::MatrixXd& rhs) const {
  if (pk() == 0) return Eigen::MatrixXd(0, rhs.cols());
  // (X_k^T X_k)^{-1} = R^{-1} R^{-T} from the thin QR factor.
  const Eigen::MatrixXd R =
      qr_.matrixQR().topRows(pk()).triangularView<Eigen::Upper>();
  Eigen::MatrixXd tmp = R.transpose().triangularView<Eigen::Lower>().solve(rhs);
  return R.triangularView<Eigen::Upper>().solve(tmp);
}

double ModelBasis::ssr(const Eigen::VectorXd& y) const { return residual(y).squaredNorm(); }

OlsFit ols_fit(const Dataset& data, const ModelId& model) {
  const ModelBasis basis(data.X, model);
  OlsFit fit;
  fit.beta_hat = basis.solve_ls(data.y);
  fit.ssr = basis.ssr(data.y);
  return fit;
}

double quad_form_Qk(const Eigen::VectorXd& beta, const ModelId& model, const Eigen::MatrixXd& X) {
  if (beta.size() != X.cols()) throw DataError("quad_form_Qk: beta length must equal p");
  const ModelBasis basis(X, model);
  const Eigen::VectorXd fitted = X * beta;
  return basis.residual(fitted).squaredNorm() / static_cast<double>(X.rows());
}

ProjectionPair projection_pair(const Eigen::MatrixXd& X, const ModelId& model) {
  const int n = static_cast<int>(X.rows());
  if (n > 512) throw DataError("projection_pair: refusing to materialize n x n matrices for n > 512");
  const ModelBasis basis(X, model);
  ProjectionPair pair;
  pair.P = Eigen::MatrixXd::Zero(n, n);
  if (basis.pk() > 0) {
    // P = X_k (X_k^T X_k)^{-1} X_k^T, column by column through the QR solve.
    Eigen::MatrixXd coeffs(basis.pk(), n);
    for (int i = 0; i < n; ++i) coeffs.col(i) = basis.solve_ls(Eigen::VectorXd::Unit(n, i));
    pair.P = basis.Xk() * coeffs;
    pair.P = 0.5 * (pair.P + pair.P.transpose().eval()); // symmetrize roundoff
  }
  pair.M = Eigen::MatrixXd::Identity(n, n) - pair.P;
  return pair;
}

} // namespace gnig
