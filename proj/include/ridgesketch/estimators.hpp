#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>

#include "ridgesketch/core_types.hpp"

namespace ridgesketch {

enum class SketchKind { primal, dual, full, marginal };
enum class SketchFamily { subsample, haar, srht, gaussian };

std::string_view to_string(SketchKind kind);
std::string_view to_string(SketchFamily family);
SketchKind parse_sketch_kind(std::string_view text);
SketchFamily parse_sketch_family(std::string_view text);

/// Which sketch to apply and how large it is. ratio is m/n for primal and full
/// sketches and d/p for dual sketches; marginal ignores family and ratio.
struct SketchSpec {
  SketchKind kind = SketchKind::primal;
  SketchFamily family = SketchFamily::haar;
  double ratio = 1.0;

  void validate() const;
  bool orthogonal() const { return family != SketchFamily::gaussian; }
};

/// An estimator of the form beta_hat = T * Y with T of shape p x n.
struct LinearEstimator {
  Eigen::MatrixXd T;
  std::string label;

  Eigen::VectorXd estimate(const Eigen::VectorXd& y) const;
};

struct RiskReport {
  double bias2 = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  std::optional<double> residual;

  static RiskReport from_parts(double bias2, double variance,
                               std::optional<double> residual = std::nullopt) {
    return {bias2, variance, bias2 + variance, residual};
  }
};

// Ridge estimator (X'X/n + lam I)^{-1} X'/n. Uses the p x p system when p <= n
// and the n x n dual system otherwise. lam = 0 is accepted only when X has
// full column rank.
LinearEstimator ridge_map(const Eigen::MatrixXd& X, double lam);
// Forced primal / dual solves, for identity checks.
LinearEstimator ridge_map_primal(const Eigen::MatrixXd& X, double lam);
LinearEstimator ridge_map_dual(const Eigen::MatrixXd& X, double lam);

/// Ridge coefficients (X'X/n + lam I)^{-1} X'y/n without forming the p x n map.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lam);

/// Sketch matrix of shape rows x cols, where rows is the sketch dimension.
///
/// - subsample: rows distinct standard basis rows in random order.
/// - haar: orthonormal rows of a Haar-distributed orthogonal matrix, from the
///   QR factorization of a Gaussian matrix with the R diagonal made positive.
/// - srht: rows of D H / sqrt(N) restricted to the first cols columns, where H
///   is the N x N Walsh-Hadamard matrix, N the next power of two >= cols and D
///   a random sign flip. When cols < N the truncated rows are re-orthonormalized
///   (thin QR, sign-fixed) so L L' = I holds exactly in dimension cols.
/// - gaussian: i.i.d. N(0, 1/rows) entries, so E[L'L] = I.
///
/// Orthogonal families require rows <= cols. A dual sketch R (p x d) is the
/// transpose of make_sketch(family, d, p, rng).
Eigen::MatrixXd make_sketch(SketchFamily family, Eigen::Index rows, Eigen::Index cols,
                            RngStream rng);

inline constexpr Eigen::Index kSrhtMaxPadded = Eigen::Index{1} << 16;

// (X'L'LX/n + lam I)^{-1} X'/n. An empty sketch (m = 0) gives the marginal map.
LinearEstimator primal_sketch_map(const Eigen::MatrixXd& X, double lam, const Eigen::MatrixXd& L);
// X'(XRR'X'/n + lam I)^{-1}/n with R of shape p x d. d = 0 gives the marginal map.
LinearEstimator dual_sketch_map(const Eigen::MatrixXd& X, double lam, const Eigen::MatrixXd& R);
// (X'L'LX/n + lam I)^{-1} X'L'L/n.
LinearEstimator full_sketch_map(const Eigen::MatrixXd& X, double lam, const Eigen::MatrixXd& L);
// X'/(n lam), the vanishing-sketch limit of primal and dual sketching.
LinearEstimator marginal_map(const Eigen::MatrixXd& X, double lam);

/// Draws the sketch described by spec (sized from X) and builds the estimator.
LinearEstimator sketched_estimator(const Eigen::MatrixXd& X, double lam, const SketchSpec& spec,
                                   RngStream rng);

/// Exact risk of a linear estimator conditional on X (and on any sketch baked
/// into T) under the random-effects prior Cov(beta) = alpha2/p I and noise
/// Cov(eps) = sigma2 I:
///   bias2    = alpha2/p ||T X - I_p||_F^2
///   variance = sigma2 ||T||_F^2
///   residual = alpha2/p ||(I_n - X T) X||_F^2 / n + sigma2/n ||I_n - X T||_F^2
/// Contractions are ordered by whichever of n, p is smaller.
RiskReport linear_risk(const LinearEstimator& est, const Eigen::MatrixXd& X,
                       const ModelParams& model, bool with_residual = true);

}  // namespace ridgesketch
