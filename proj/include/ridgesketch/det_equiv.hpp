#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "ridgesketch/core_types.hpp"

namespace ridgesketch {

/// Solution of 1 - c = (c/n) tr[Sigma (c Sigma + lam I)^{-1}] together with
/// c' = dc/dz at z = -lam.
struct FixedPointResult {
  double c;
  double c_prime;
  int iterations;
  double residual;
};

/// Scalar maps applied to the eigenvalues of Sigma.
///
///   signal(x)       = c x / (c x + lam)
///       deterministic equivalent of (Sigma_hat + lam I)^{-1} Sigma_hat, i.e. the
///       coefficient of beta in E[beta_hat].
///   noise_kernel(x) = x (c + lam c') / (c x + lam)^2
///       deterministic equivalent of (Sigma_hat + lam I)^{-2} Sigma_hat, which
///       carries the noise covariance.
///   noise_kernel_resolvent
///       the same kernel assembled as (c Sigma + lam I)^{-1}
///       - lam (c Sigma + lam I)^{-2} (I - c' Sigma); used to cross-check the
///       closed scalar form.
struct RepresentationPair {
  Eigen::MatrixXd signal;
  Eigen::MatrixXd noise_kernel;
  Eigen::MatrixXd noise_kernel_resolvent;
  FixedPointResult fixed_point;
};

inline constexpr double kFixedPointTol = 1e-13;

FixedPointResult solve_cp(std::span<const double> spectrum, Eigen::Index n, double lam);

/// Builds the pair for Sigma given by its eigen-decomposition (vectors as
/// columns). With an identity basis the matrices are diagonal.
RepresentationPair representation_pair(std::span<const double> spectrum,
                                       const Eigen::MatrixXd& eigenvectors, Eigen::Index n,
                                       double lam);
RepresentationPair representation_pair(std::span<const double> spectrum, Eigen::Index n,
                                       double lam);

/// Scalar forms, exposed for tests and the harness.
double signal_coefficient(double x, const FixedPointResult& fp, double lam);
double noise_kernel_coefficient(double x, const FixedPointResult& fp, double lam);

struct ResolventTestResult {
  double max_deviation;            // max over probes of the replicate-mean |u'(R_hat - R)u|
  std::vector<double> per_probe;   // replicate-mean deviation for each probe
  double trace2_empirical;         // mean tr[(Sigma_hat + lam I)^{-2}]/p
  double trace2_equivalent;        // tr[(c Sigma + lam I)^{-2}(I - c' Sigma)]/p
};

/// Compares (Sigma_hat + lam I)^{-1} with (c Sigma + lam I)^{-1} against
/// `probes` fixed rank-one probes u u' (||u|| = 1), averaging |u'(.)u| over
/// `replicates` designs X = U Sigma^{1/2}.
ResolventTestResult resolvent_equivalence_test(Eigen::Index n, Eigen::Index p,
                                               const CovarianceSpec& cov, double lam, int probes,
                                               int replicates, RngStream rng);

struct RepresentationBiasResult {
  double max_deviation;       // max_w |mean_r w'beta_hat_r - w' signal beta|
  double max_standard_error;  // largest MC standard error among the probes
  std::vector<double> deviation;
  std::vector<double> standard_error;
};

/// Estimates E[w' beta_hat] over `reps` draws of (X, eps) for `probes` fixed unit
/// vectors w and compares with w' signal(Sigma) beta.
RepresentationBiasResult representation_bias_test(Eigen::Index n, Eigen::Index p,
                                                  const CovarianceSpec& cov,
                                                  const Eigen::VectorXd& beta, double lam,
                                                  double sigma, int probes, int reps,
                                                  RngStream rng);

}  // namespace ridgesketch
