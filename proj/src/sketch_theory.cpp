#include "ridgesketch/sketch_theory.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "ridgesketch/errors.hpp"
#include "ridgesketch/mp_theory.hpp"

namespace ridgesketch {

using Eigen::Index;
using Eigen::MatrixXd;

std::string_view to_string(SketchTheoryKind kind) {
  switch (kind) {
    case SketchTheoryKind::ridge: return "ridge";
    case SketchTheoryKind::primal_orth: return "primal_orth";
    case SketchTheoryKind::dual_orth: return "dual_orth";
    case SketchTheoryKind::full_orth: return "full_orth";
    case SketchTheoryKind::marginal: return "marginal";
    case SketchTheoryKind::dual_gaussian_bias: return "dual_gaussian_bias";
    case SketchTheoryKind::primal_gaussian_bias: return "primal_gaussian_bias";
  }
  return "?";
}

SketchTheoryKind parse_sketch_theory_kind(std::string_view text) {
  for (auto k : {SketchTheoryKind::ridge, SketchTheoryKind::primal_orth,
                 SketchTheoryKind::dual_orth, SketchTheoryKind::full_orth,
                 SketchTheoryKind::marginal, SketchTheoryKind::dual_gaussian_bias,
                 SketchTheoryKind::primal_gaussian_bias}) {
    if (to_string(k) == text) return k;
  }
  throw ValidationError("unknown sketch theory kind '" + std::string(text) + "'");
}

namespace {

void require_ratio(double r, const char* who) {
  if (!(r > 0.0 && r <= 1.0)) {
    std::ostringstream os;
    os << who << ": sketch ratio must lie in (0, 1], got " << r;
    throw ValidationError(os.str());
  }
}

}  // namespace

RiskReport primal_orth_mse(double gamma, double xi, double lam, const ModelParams& model) {
  SpectrumParams{gamma, lam}.validate();
  model.validate();
  require_ratio(xi, "primal_orth_mse");
  const ThetaValues t = theta(gamma / xi, lam / xi);
  const double shift = lam + xi - 1.0;
  const double xi2 = xi * xi;
  const double bias2 = model.alpha2 * (shift * shift + gamma * (1.0 - xi)) * t.theta2 / xi2;
  const double variance = gamma * model.sigma2 * (xi * t.theta1 - shift * t.theta2) / xi2;
  return RiskReport::from_parts(bias2, variance);
}

RiskReport dual_orth_mse(double gamma, double zeta, double lam, const ModelParams& model) {
  SpectrumParams{gamma, lam}.validate();
  model.validate();
  if (!(zeta > 0.0) || zeta > gamma * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dual_orth_mse: zeta = d/n must lie in (0, gamma], got zeta=" << zeta
       << " with gamma=" << gamma;
    throw ValidationError(os.str());
  }
  const BarThetaValues b = theta_bar(zeta, lam);
  const double shift = lam - gamma + zeta;
  const double bias2 =
      model.alpha2 / gamma * (gamma - 1.0 + shift * shift * b.bar2 + (gamma - zeta) * b.bar1 * b.bar1);
  const double variance = model.sigma2 * (b.bar1 - (lam + zeta - gamma) * b.bar2);
  return RiskReport::from_parts(bias2, variance);
}

RiskReport marginal_mse(double gamma, double lam, const ModelParams& model) {
  SpectrumParams{gamma, lam}.validate();
  model.validate();
  const double lam2 = lam * lam;
  const double bias2 = model.alpha2 * ((lam - 1.0) * (lam - 1.0) + gamma) / lam2;
  const double variance = model.sigma2 * gamma / lam2;
  return RiskReport::from_parts(bias2, variance);
}

LambdaOptimum marginal_optimum(double gamma, const ModelParams& model) {
  model.validate();
  if (!(gamma > 0.0)) throw ValidationError("marginal_optimum: gamma must be positive");
  if (!(model.alpha2 > 0.0)) {
    throw ValidationError("marginal_optimum: alpha2 = 0 makes the optimal penalty infinite");
  }
  const double a2 = model.alpha2;
  const double lam = gamma * model.sigma2 / a2 + 1.0 + gamma;
  const double mse = a2 * (1.0 - a2 / (a2 * (1.0 + gamma) + gamma * model.sigma2));
  return {lam, mse};
}

RiskReport full_sketch_mse(double gamma, double xi, double lam, const ModelParams& model) {
  SpectrumParams{gamma, lam}.validate();
  model.validate();
  require_ratio(xi, "full_sketch_mse");
  const ThetaValues t = theta(gamma / xi, lam / xi);
  const double xi2 = xi * xi;
  const double bias2 = model.alpha2 * lam * lam * t.theta2 / xi2;
  const double variance = model.sigma2 * gamma * (t.theta1 / xi - lam * t.theta2 / xi2);
  return RiskReport::from_parts(bias2, variance);
}

double full_sketch_optimal_lambda(double gamma, const ModelParams& model) {
  return optimal_lambda_ridge(gamma, model);
}

double dual_gaussian_inverse_stieltjes(double y, double gamma, double zeta, double lam) {
  const double s = std::sqrt((gamma - 1.0) * (gamma - 1.0) + 4.0 * lam * y);
  return 1.0 / (1.0 + y / zeta) - (gamma + 1.0 - s) / (2.0 * y);
}

double dual_gaussian_inverse_stieltjes_derivative(double y, double gamma, double zeta,
                                                  double lam) {
  const double s = std::sqrt((gamma - 1.0) * (gamma - 1.0) + 4.0 * lam * y);
  const double q = 1.0 + y / zeta;
  return -1.0 / (zeta * q * q) + (gamma + 1.0 - s) / (2.0 * y * y) + lam / (y * s);
}

DualGaussianBias dual_gaussian_bias(double gamma, double zeta, double lam, double alpha2) {
  if (!(gamma > 0.0) || !(zeta > 0.0) || !(lam > 0.0) || !(alpha2 >= 0.0)) {
    throw ValidationError("dual_gaussian_bias: gamma, zeta, lam must be positive, alpha2 >= 0");
  }
  auto f = [&](double y) { return dual_gaussian_inverse_stieltjes(y, gamma, zeta, lam); };

  constexpr double kStart = 1e-10;
  double lo = kStart;
  if (!(f(lo) < 0.0)) {
    std::ostringstream os;
    os << "dual_gaussian_bias: inverse transform is not negative at y=" << lo;
    throw NumericError(os.str());
  }
  double hi = lo;
  int growth = 0;
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++growth > 400 || !std::isfinite(hi)) {
      std::ostringstream os;
      os << "dual_gaussian_bias: no sign change on [" << kStart << ", " << hi << "]";
      throw NumericError(os.str());
    }
  }

  constexpr int kScan = 64;
  double prev = f(lo);
  for (int k = 1; k <= kScan; ++k) {
    const double y = lo + (hi - lo) * k / kScan;
    const double v = f(y);
    if (!(v > prev)) {
      std::ostringstream os;
      os << "dual_gaussian_bias: inverse transform not increasing on bracket [" << lo << ", "
         << hi << "]";
      throw NumericError(os.str());
    }
    prev = v;
  }

  const double bracket_lo = lo;
  const double bracket_hi = hi;
  for (int it = 0; it < 300 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double m0 = std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;

  const double slope = dual_gaussian_inverse_stieltjes_derivative(m0, gamma, zeta, lam);
  const double h = 1e-5 * m0;
  const double slope_fd = (f(m0 + h) - f(m0 - h)) / (2.0 * h);
  if (!(slope > 0.0)) throw NumericError("dual_gaussian_bias: non-positive slope at the root");

  FreeConvolutionPoint point{m0, 1.0 / slope, 1.0 / slope_fd, bracket_lo, bracket_hi,
                             std::abs(f(m0))};
  const double bias2 = alpha2 + alpha2 / gamma * (point.m0_prime - 2.0 * point.m0);
  return {bias2, point};
}

McEstimate primal_gaussian_bias(double gamma, double xi, double lam, double alpha2, int proxy_n,
                                int reps, RngStream rng) {
  if (!(gamma > 0.0) || !(lam > 0.0) || !(alpha2 >= 0.0)) {
    throw ValidationError("primal_gaussian_bias: gamma, lam must be positive, alpha2 >= 0");
  }
  require_ratio(xi, "primal_gaussian_bias");
  if (proxy_n < 200) throw ValidationError("primal_gaussian_bias: proxy_n must be >= 200");
  if (reps < 2) throw ValidationError("primal_gaussian_bias: need reps >= 2");
  const Index n = proxy_n;
  const auto d = static_cast<Index>(std::llround(xi * n));
  const auto p = static_cast<Index>(std::llround(gamma * n));
  if (p < n) {
    std::ostringstream os;
    os << "primal_gaussian_bias: the proxy needs an invertible G = XX' (p >= n), but gamma="
       << gamma << " gives p=" << p << " < n=" << n;
    throw ValidationError(os.str());
  }
  if (d < 1) throw ValidationError("primal_gaussian_bias: sketch dimension rounds to zero");

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    RngStream rep = rng.child(static_cast<std::uint64_t>(r));
    const MatrixXd z = rep.child(1).normal_matrix(d, n);
    const MatrixXd x = rep.child(2).normal_matrix(n, p);

    MatrixXd a = MatrixXd::Zero(n, n);
    a.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), 1.0 / static_cast<double>(d));
    MatrixXd g_over_p = MatrixXd::Zero(n, n);
    g_over_p.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(p));
    a = a.selfadjointView<Eigen::Lower>();
    g_over_p = g_over_p.selfadjointView<Eigen::Lower>();

    Eigen::LLT<MatrixXd> g_llt(g_over_p);
    if (g_llt.info() != Eigen::Success) {
      throw NumericError("primal_gaussian_bias: G/p is numerically singular");
    }
    const MatrixXd b = (lam / gamma) * g_llt.solve(MatrixXd::Identity(n, n));
    const MatrixXd b_inv = (gamma / lam) * g_over_p;
    Eigen::LLT<MatrixXd> sum_llt(a + b);
    if (sum_llt.info() != Eigen::Success) throw NumericError("primal_gaussian_bias: a + b failed");
    const MatrixXd c = sum_llt.solve(MatrixXd::Identity(n, n));

    const MatrixXd cb = c * b;
    const MatrixXd cbinv = c * b_inv;
    // tr(C B C B^{-1}) = sum_ij (CB)_ij (C B^{-1})_ji
    const double tau1 = cb.cwiseProduct(cbinv.transpose()).sum() / static_cast<double>(n);
    const double tau2 = c.trace() / static_cast<double>(n);
    values.push_back(alpha2 + alpha2 / gamma * (tau1 - 2.0 * tau2));
  }

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(reps);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps));
  return {mean, se, reps};
}

RiskReport sketch_theory(const SketchTheoryQuery& q) {
  switch (q.kind) {
    case SketchTheoryKind::ridge:
      return ridge_risk_theory({q.gamma, q.lam}, q.model);
    case SketchTheoryKind::primal_orth:
      return primal_orth_mse(q.gamma, q.ratio, q.lam, q.model);
    case SketchTheoryKind::dual_orth:
      require_ratio(q.ratio, "dual_orth_mse");
      return dual_orth_mse(q.gamma, q.ratio * q.gamma, q.lam, q.model);
    case SketchTheoryKind::full_orth:
      return full_sketch_mse(q.gamma, q.ratio, q.lam, q.model);
    case SketchTheoryKind::marginal:
      return marginal_mse(q.gamma, q.lam, q.model);
    case SketchTheoryKind::dual_gaussian_bias: {
      require_ratio(q.ratio, "dual_gaussian_bias");
      const auto r = dual_gaussian_bias(q.gamma, q.ratio * q.gamma, q.lam, q.model.alpha2);
      RiskReport out;
      out.bias2 = r.bias2;
      out.variance = std::numeric_limits<double>::quiet_NaN();
      out.mse = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
    case SketchTheoryKind::primal_gaussian_bias:
      break;
  }
  throw ValidationError("sketch_theory: kind " + std::string(to_string(q.kind)) +
                        " has no deterministic formula");
}

double sketch_lambda_upper(double gamma, const ModelParams& model) {
  if (!(model.alpha2 > 0.0)) {
    throw ValidationError("optimal_lambda_sketch: alpha2 must be positive");
  }
  return 10.0 * (1.0 + gamma * model.sigma2 / model.alpha2 + gamma);
}

LambdaOptimum optimal_lambda_sketch(SketchTheoryKind kind, double gamma, double ratio,
                                    const ModelParams& model) {
  if (kind == SketchTheoryKind::dual_gaussian_bias ||
      kind == SketchTheoryKind::primal_gaussian_bias) {
    throw ValidationError("optimal_lambda_sketch: no MSE formula for Gaussian sketches");
  }
  model.validate();
  const double lam_lo = 1e-6;
  const double lam_hi = sketch_lambda_upper(gamma, model);
  auto objective = [&](double lam) {
    return sketch_theory({gamma, ratio, lam, model, kind}).mse;
  };

  constexpr int kGrid = 400;
  std::vector<double> grid(kGrid);
  std::vector<double> value(kGrid);
  const double step = std::log(lam_hi / lam_lo) / (kGrid - 1);
  std::size_t best = 0;
  for (int i = 0; i < kGrid; ++i) {
    grid[static_cast<std::size_t>(i)] = lam_lo * std::exp(step * i);
    value[static_cast<std::size_t>(i)] = objective(grid[static_cast<std::size_t>(i)]);
    if (value[static_cast<std::size_t>(i)] < value[best]) best = static_cast<std::size_t>(i);
  }
  const double slack = 1e-12 * std::abs(value[best]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const bool descending = i <= best;
    const bool ok = descending ? value[i] <= value[i - 1] + slack : value[i] + slack >= value[i - 1];
    if (!ok) {
      std::ostringstream os;
      os << "optimal_lambda_sketch: " << to_string(kind) << " MSE is not unimodal in lam near "
         << grid[i];
      throw NumericError(os.str());
    }
  }
  if (best == 0 || best + 1 == grid.size()) {
    std::ostringstream os;
    os << "optimal_lambda_sketch: minimum sits at the search boundary lam=" << grid[best];
    throw NumericError(os.str());
  }

  // Golden-section search on the bracketing grid cells.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = grid[best - 1];
  double b = grid[best + 1];
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  while (b - a > 1e-13 * (a + b)) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  const double lam = 0.5 * (a + b);
  return {lam, objective(lam)};
}

}  // namespace ridgesketch
