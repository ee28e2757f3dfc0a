#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

#include "ridgesketch/core_types.hpp"
#include "ridgesketch/estimators.hpp"

namespace ridgesketch {

/// Resolvent moments theta_i(gamma, lam) = int (x + lam)^{-i} dF_gamma(x) of the
/// standard Marchenko-Pastur law, i = 1, 2.
struct ThetaValues {
  double theta1;
  double theta2;
  SpectrumParams at;
};

/// Companion-law moments bar_i = (1 - zeta)/lam^i + zeta theta_i(zeta, lam).
struct BarThetaValues {
  double bar1;
  double bar2;
  double zeta;
  double lam;
};

/// Support [a, b] = [(1 - sqrt(gamma))^2, (1 + sqrt(gamma))^2] of the continuous
/// part of F_gamma. F_gamma also has an atom of mass 1 - 1/gamma at 0 when
/// gamma > 1.
std::pair<double, double> mp_support(double gamma);

/// Stieltjes transform m_gamma(z) = int (x - z)^{-1} dF_gamma(x).
///
/// Evaluated as ((z + gamma - 1) - sqrt(z - a) sqrt(z - b)) / (-2 z gamma) with
/// principal square roots of each factor; this keeps the branch cut on [a, b]
/// so Im m >= 0 whenever Im z > 0, and coincides with the principal-branch
/// closed form on the negative real axis. Rejects z in the support.
std::complex<double> mp_stieltjes(double gamma, std::complex<double> z);

ThetaValues theta(double gamma, double lam);
BarThetaValues theta_bar(double zeta, double lam);

/// Mean of (e + lam)^{-order} over an explicit eigenvalue list; the resolvent
/// moment of a discrete spectral law.
double spectral_moment(std::span<const double> eigenvalues, double lam, int order);

/// Limiting bias^2, variance, MSE and residual of ridge regression with
/// isotropic Gaussian design under the random-effects model.
RiskReport ridge_risk_theory(const SpectrumParams& params, const ModelParams& model);

/// gamma sigma2 / alpha2; rejects alpha2 = 0.
double optimal_lambda_ridge(double gamma, const ModelParams& model);

std::vector<RiskReport> bias_variance_curve(double gamma, const ModelParams& model,
                                            std::span<const double> lam_grid);

}  // namespace ridgesketch
