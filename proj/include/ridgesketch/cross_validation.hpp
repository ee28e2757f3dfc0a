#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "ridgesketch/core_types.hpp"

namespace ridgesketch {

struct CvReport {
  std::vector<double> lam_grid;
  Eigen::MatrixXd fold_errors;     // folds x grid, mean squared validation error
  std::vector<double> cv_curve;    // column means of fold_errors
  std::vector<double> cv_se;       // standard error of each column mean (0 for one fold)
  std::size_t argmin = 0;
  double lam_cv = 0.0;
  double debias_factor = 1.0;      // (K-1)/K, or the training fraction for one split
  double lam_debiased = 0.0;
  double lam_one_se = 0.0;         // largest lam within one SE of the minimum, reported only
  std::optional<double> lam_loo;
  bool argmin_on_boundary = false;
  Eigen::Index dropped_rows = 0;
  std::vector<std::string> warnings;
};

/// Ridge solutions along a penalty path, (X'X/n + lam I)^{-1} X'y/n, from one
/// eigendecomposition of whichever Gram matrix is smaller.
class RidgePath {
 public:
  RidgePath(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
  Eigen::VectorXd coefficients(double lam) const;
  /// Diagonal of S(lam) = X (X'X + n lam I)^{-1} X'.
  Eigen::VectorXd leverage(double lam) const;

 private:
  bool primal_;
  double n_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXd evecs_;
  Eigen::VectorXd rotated_;  // V' X'y / n (primal) or U' y (dual)
  Eigen::MatrixXd xv_;       // X V (primal) or X' (dual)
};

/// 40 log-spaced points on [lam_star/30, 30 lam_star] with lam_star = gamma sigma2/alpha2,
/// or on [1e-3, 1e2] when the model is unknown or alpha2 = 0.
std::vector<double> default_lambda_grid(std::optional<double> gamma,
                                        std::optional<ModelParams> model, int points = 40);

/// Random partition of n indices into K equal folds; the n mod K leftover
/// rows (after shuffling) are dropped.
std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int K, RngStream rng,
                                                  Eigen::Index* dropped = nullptr);

/// K-fold CV. Each fold estimator solves (X_{-k}'X_{-k} + n1 lam I) b = X_{-k}'Y_{-k}
/// with n1 the training-fold size; lam_debiased = lam_cv (K-1)/K.
CvReport kfold_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const std::vector<double>& lam_grid, int K, RngStream rng);

/// Single random split; the debias factor is the training fraction.
CvReport train_test_validate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const std::vector<double>& lam_grid, double train_fraction,
                             RngStream rng);

struct LooResult {
  std::vector<double> loo_curve;
  double lam_loo;
  std::size_t argmin;
};

/// Exact leave-one-out error via loo(lam) = mean[((Y_i - X_i'b(lam)) / (1 - S_ii))^2].
LooResult loo_shortcut(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const std::vector<double>& lam_grid);

/// Mean of the K fold estimators at lam.
Eigen::VectorXd averaged_fold_estimator(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        double lam, int K, RngStream rng);

}  // namespace ridgesketch
