#pragma once

#include <string_view>

#include "ridgesketch/core_types.hpp"
#include "ridgesketch/estimators.hpp"

namespace ridgesketch {

enum class SketchTheoryKind {
  ridge,
  primal_orth,
  dual_orth,
  full_orth,
  marginal,
  dual_gaussian_bias,
  primal_gaussian_bias,
};

std::string_view to_string(SketchTheoryKind kind);
SketchTheoryKind parse_sketch_theory_kind(std::string_view text);

/// One theory evaluation. ratio follows SketchSpec: m/n for primal and full
/// sketches, d/p for dual sketches (converted internally to d/n = ratio * gamma).
struct SketchTheoryQuery {
  double gamma;
  double ratio;
  double lam;
  ModelParams model;
  SketchTheoryKind kind;
};

/// Root m(0) of the inverse Stieltjes transform of the free convolution that
/// governs dual Gaussian sketching, and m'(0) = 1 / (m^{-1})'(m(0)).
struct FreeConvolutionPoint {
  double m0;
  double m0_prime;
  double m0_prime_fd;  // central-difference cross-check of m0_prime
  double bracket_lo;
  double bracket_hi;
  double residual;     // |m^{-1}(m0)|
};

struct DualGaussianBias {
  double bias2;
  FreeConvolutionPoint point;
};

struct McEstimate {
  double mean;
  double standard_error;
  int replicates;
};

struct LambdaOptimum {
  double lam;
  double mse;
};

// Orthogonal primal sketch, xi = m/n in (0, 1].
RiskReport primal_orth_mse(double gamma, double xi, double lam, const ModelParams& model);
// Orthogonal dual sketch, zeta = d/n in (0, gamma].
RiskReport dual_orth_mse(double gamma, double zeta, double lam, const ModelParams& model);
// Vanishing sketch size: M(lam) = [alpha2((lam - 1)^2 + gamma) + sigma2 gamma] / lam^2.
RiskReport marginal_mse(double gamma, double lam, const ModelParams& model);
LambdaOptimum marginal_optimum(double gamma, const ModelParams& model);
// Sketching both X and Y with an orthogonal m x n sketch, xi = m/n in (0, 1].
RiskReport full_sketch_mse(double gamma, double xi, double lam, const ModelParams& model);
// gamma sigma2 / alpha2, the same as for unsketched ridge.
double full_sketch_optimal_lambda(double gamma, const ModelParams& model);

/// Inverse Stieltjes transform
///   m^{-1}(y) = 1/(1 + y/zeta) - (gamma + 1 - sqrt((gamma - 1)^2 + 4 lam y)) / (2y)
/// and its derivative, on the positive real axis.
double dual_gaussian_inverse_stieltjes(double y, double gamma, double zeta, double lam);
double dual_gaussian_inverse_stieltjes_derivative(double y, double gamma, double zeta,
                                                  double lam);

/// Squared bias of dual sketching with R having i.i.d. N(0, 1/d) entries,
/// alpha2 + alpha2/gamma [m'(0) - 2 m(0)]. zeta is the Wishart ratio d/n.
DualGaussianBias dual_gaussian_bias(double gamma, double zeta, double lam, double alpha2);

/// Squared bias of primal sketching with L having i.i.d. N(0, 1/d) entries,
///   alpha2 + alpha2/gamma [tau((a+b)^{-1} b (a+b)^{-1} b^{-1}) - 2 tau((a+b)^{-1})],
/// with the free pair (a, b) replaced by independent finite matrices
/// a = W/d, W ~ Wishart(I_n, d) and b = (lam/gamma)(G/p)^{-1}, G ~ Wishart(I_n, p),
/// n = proxy_n, d = xi n, p = gamma n, tau = tr/n. Requires p >= n.
McEstimate primal_gaussian_bias(double gamma, double xi, double lam, double alpha2, int proxy_n,
                                int reps, RngStream rng);

/// Dispatch on query.kind. dual_gaussian_bias fills bias2 only (variance is
/// not available in closed form); primal_gaussian_bias is not handled here.
RiskReport sketch_theory(const SketchTheoryQuery& query);

/// Upper end of the penalty search interval, 10 (1 + gamma sigma2/alpha2 + gamma).
double sketch_lambda_upper(double gamma, const ModelParams& model);

/// Numerical minimizer of the theory MSE over lam in [1e-6, sketch_lambda_upper].
/// The objective is scanned on a log grid and must be unimodal there; the grid
/// argmin is refined by golden-section search.
LambdaOptimum optimal_lambda_sketch(SketchTheoryKind kind, double gamma, double ratio,
                                    const ModelParams& model);

}  // namespace ridgesketch
