#include "ridgesketch/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ridgesketch/errors.hpp"

namespace ridgesketch {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

RidgePath::RidgePath(const MatrixXd& X, const VectorXd& y)
    : primal_(X.cols() <= X.rows()), n_(static_cast<double>(X.rows())) {
  if (X.rows() < 1 || X.cols() < 1) throw ValidationError("RidgePath: empty design");
  if (y.size() != X.rows()) throw ValidationError("RidgePath: response length mismatch");
  MatrixXd gram = MatrixXd::Zero(primal_ ? X.cols() : X.rows(), primal_ ? X.cols() : X.rows());
  if (primal_) {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose(), 1.0 / n_);
  } else {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(X, 1.0 / n_);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);  // reads the lower triangle
  if (es.info() != Eigen::Success) throw NumericError("RidgePath: eigendecomposition failed");
  evals_ = es.eigenvalues().cwiseMax(0.0);
  evecs_ = es.eigenvectors();
  if (primal_) {
    rotated_ = evecs_.transpose() * (X.transpose() * y) / n_;
    xv_ = X * evecs_;
  } else {
    rotated_ = evecs_.transpose() * y;
    xv_ = X.transpose();
  }
}

VectorXd RidgePath::coefficients(double lam) const {
  if (!(lam > 0.0)) throw ValidationError("RidgePath: lam must be positive");
  const VectorXd scaled = rotated_.array() / (evals_.array() + lam);
  if (primal_) return evecs_ * scaled;
  return xv_ * (evecs_ * scaled) / n_;
}

VectorXd RidgePath::leverage(double lam) const {
  if (!(lam > 0.0)) throw ValidationError("RidgePath: lam must be positive");
  if (primal_) {
    const VectorXd w = ((evals_.array() + lam) * n_).inverse();
    return xv_.array().square().matrix() * w;
  }
  const VectorXd w = evals_.array() / (evals_.array() + lam);
  return evecs_.array().square().matrix() * w;
}

std::vector<double> default_lambda_grid(std::optional<double> gamma,
                                        std::optional<ModelParams> model, int points) {
  if (points < 2) throw ValidationError("default_lambda_grid: need at least 2 points");
  double lo = 1e-3;
  double hi = 1e2;
  if (gamma && model && model->alpha2 > 0.0) {
    const double star = *gamma * model->sigma2 / model->alpha2;
    lo = star / 30.0;
    hi = star * 30.0;
  }
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  return grid;
}

namespace {

void validate_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ValidationError("lambda grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) {
      std::ostringstream os;
      os << "lambda grid entries must be positive, got " << grid[i] << " at index " << i;
      throw ValidationError(os.str());
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      std::ostringstream os;
      os << "lambda grid must be strictly increasing (index " << i << ")";
      throw ValidationError(os.str());
    }
  }
}

void validate_data(const MatrixXd& X, const VectorXd& y) {
  if (X.rows() < 1 || X.cols() < 1) throw ValidationError("design has zero rows or columns");
  if (y.size() != X.rows()) throw ValidationError("response length does not match design rows");
}

MatrixXd take_rows(const MatrixXd& X, const std::vector<Index>& idx) {
  MatrixXd out(static_cast<Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = X.row(idx[i]);
  return out;
}

VectorXd take_rows(const VectorXd& y, const std::vector<Index>& idx) {
  VectorXd out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = y[idx[i]];
  return out;
}

std::vector<Index> shuffled(Index n, RngStream& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng.engine()))]);
  }
  return idx;
}

// Validation MSE at every grid point for one train/validation split.
VectorXd split_errors(const MatrixXd& X, const VectorXd& y, const std::vector<Index>& train,
                      const std::vector<Index>& valid, const std::vector<double>& grid) {
  const MatrixXd xt = take_rows(X, train);
  const VectorXd yt = take_rows(y, train);
  const MatrixXd xv = take_rows(X, valid);
  const VectorXd yv = take_rows(y, valid);
  const RidgePath path(xt, yt);
  VectorXd err(static_cast<Index>(grid.size()));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    err[static_cast<Index>(g)] = (yv - xv * path.coefficients(grid[g])).squaredNorm() /
                                 static_cast<double>(valid.size());
  }
  return err;
}

void summarize(CvReport& r) {
  const Index folds = r.fold_errors.rows();
  const std::size_t G = r.lam_grid.size();
  r.cv_curve.assign(G, 0.0);
  r.cv_se.assign(G, 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    const auto col = r.fold_errors.col(static_cast<Index>(g));
    const double mean = col.mean();
    r.cv_curve[g] = mean;
    if (folds > 1) {
      const double var = (col.array() - mean).square().sum() / static_cast<double>(folds - 1);
      r.cv_se[g] = std::sqrt(var / static_cast<double>(folds));
    }
  }
  r.argmin = static_cast<std::size_t>(
      std::min_element(r.cv_curve.begin(), r.cv_curve.end()) - r.cv_curve.begin());
  r.lam_cv = r.lam_grid[r.argmin];
  r.lam_debiased = r.lam_cv * r.debias_factor;
  r.argmin_on_boundary = G > 1 && (r.argmin == 0 || r.argmin + 1 == G);
  if (r.argmin_on_boundary) {
    r.warnings.push_back("CV minimum sits on the edge of the lambda grid");
  }
  const double cap = r.cv_curve[r.argmin] + r.cv_se[r.argmin];
  r.lam_one_se = r.lam_cv;
  for (std::size_t g = r.argmin; g < G; ++g) {
    if (r.cv_curve[g] <= cap) r.lam_one_se = r.lam_grid[g];
  }
}

}  // namespace

std::vector<std::vector<Index>> make_folds(Index n, int K, RngStream rng, Index* dropped) {
  if (K < 2) throw ValidationError("K-fold CV needs K >= 2");
  if (n < K) {
    std::ostringstream os;
    os << "K-fold CV: n=" << n << " rows cannot fill K=" << K << " folds";
    throw ValidationError(os.str());
  }
  const std::vector<Index> perm = shuffled(n, rng);
  const Index size = n / K;
  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    auto begin = perm.begin() + static_cast<std::ptrdiff_t>(k * size);
    folds[static_cast<std::size_t>(k)].assign(begin, begin + static_cast<std::ptrdiff_t>(size));
  }
  if (dropped) *dropped = n - size * K;
  return folds;
}

CvReport kfold_cv(const MatrixXd& X, const VectorXd& y, const std::vector<double>& lam_grid,
                  int K, RngStream rng) {
  validate_data(X, y);
  validate_grid(lam_grid);
  CvReport r;
  r.lam_grid = lam_grid;
  const auto folds = make_folds(X.rows(), K, rng, &r.dropped_rows);
  if (r.dropped_rows > 0) {
    std::ostringstream os;
    os << "dropped " << r.dropped_rows << " rows so that " << K << " folds have equal size";
    r.warnings.push_back(os.str());
  }
  r.fold_errors.resize(K, static_cast<Index>(lam_grid.size()));
  for (int k = 0; k < K; ++k) {
    std::vector<Index> train;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      const auto& f = folds[static_cast<std::size_t>(j)];
      train.insert(train.end(), f.begin(), f.end());
    }
    r.fold_errors.row(k) =
        split_errors(X, y, train, folds[static_cast<std::size_t>(k)], lam_grid).transpose();
  }
  r.debias_factor = static_cast<double>(K - 1) / static_cast<double>(K);
  summarize(r);
  return r;
}

CvReport train_test_validate(const MatrixXd& X, const VectorXd& y,
                             const std::vector<double>& lam_grid, double train_fraction,
                             RngStream rng) {
  validate_data(X, y);
  validate_grid(lam_grid);
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_test_validate: train_fraction must lie in (0, 1)");
  }
  const Index n = X.rows();
  const auto n_train = static_cast<Index>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) {
    std::ostringstream os;
    os << "train_test_validate: train_fraction=" << train_fraction << " leaves an empty split at n="
       << n;
    throw ValidationError(os.str());
  }
  const std::vector<Index> perm = shuffled(n, rng);
  const std::vector<Index> train(perm.begin(), perm.begin() + n_train);
  const std::vector<Index> valid(perm.begin() + n_train, perm.end());
  CvReport r;
  r.lam_grid = lam_grid;
  r.fold_errors = split_errors(X, y, train, valid, lam_grid).transpose();
  r.debias_factor = train_fraction;
  summarize(r);
  return r;
}

LooResult loo_shortcut(const MatrixXd& X, const VectorXd& y, const std::vector<double>& lam_grid) {
  validate_data(X, y);
  validate_grid(lam_grid);
  const RidgePath path(X, y);
  LooResult out;
  out.loo_curve.resize(lam_grid.size());
  for (std::size_t g = 0; g < lam_grid.size(); ++g) {
    const double lam = lam_grid[g];
    const VectorXd s = path.leverage(lam);
    Index worst = 0;
    if (s.maxCoeff(&worst) >= 1.0 - 1e-12) {
      std::ostringstream os;
      os << "loo_shortcut: leverage S_ii=" << s[worst] << " at row " << worst << " for lam=" << lam
         << " leaves no held-out information";
      throw NumericError(os.str());
    }
    const VectorXd resid = y - X * path.coefficients(lam);
    out.loo_curve[g] = (resid.array() / (1.0 - s.array())).square().mean();
  }
  out.argmin = static_cast<std::size_t>(
      std::min_element(out.loo_curve.begin(), out.loo_curve.end()) - out.loo_curve.begin());
  out.lam_loo = lam_grid[out.argmin];
  return out;
}

VectorXd averaged_fold_estimator(const MatrixXd& X, const VectorXd& y, double lam, int K,
                                 RngStream rng) {
  validate_data(X, y);
  if (!(lam > 0.0)) throw ValidationError("averaged_fold_estimator: lam must be positive");
  const auto folds = make_folds(X.rows(), K, rng);
  VectorXd sum = VectorXd::Zero(X.cols());
  for (int k = 0; k < K; ++k) {
    std::vector<Index> train;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      const auto& f = folds[static_cast<std::size_t>(j)];
      train.insert(train.end(), f.begin(), f.end());
    }
    sum += RidgePath(take_rows(X, train), take_rows(y, train)).coefficients(lam);
  }
  return sum / static_cast<double>(K);
}

}  // namespace ridgesketch
