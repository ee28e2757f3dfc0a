#include "ridgesketch/mp_theory.hpp"

#include <cmath>
#include <sstream>

#include "ridgesketch/errors.hpp"

namespace ridgesketch {

std::pair<double, double> mp_support(double gamma) {
  const double r = std::sqrt(gamma);
  return {(1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r)};
}

std::complex<double> mp_stieltjes(double gamma, std::complex<double> z) {
  if (!(gamma > 0.0)) throw ValidationError("mp_stieltjes: gamma must be positive");
  const auto [a, b] = mp_support(gamma);
  const bool on_axis = z.imag() == 0.0;
  if (z == 0.0 || (on_axis && z.real() >= a && z.real() <= b)) {
    std::ostringstream os;
    os << "mp_stieltjes: z = " << z.real() << " lies in the support [" << a << ", " << b << "]";
    throw ValidationError(os.str());
  }
  const std::complex<double> root = std::sqrt(z - a) * std::sqrt(z - b);
  return ((z + gamma - 1.0) - root) / (-2.0 * z * gamma);
}

ThetaValues theta(double gamma, double lam) {
  const SpectrumParams at{gamma, lam};
  at.validate();
  // With u = gamma - 1 - lam and s = sqrt(u^2 + 4 lam gamma):
  //   theta1 = (u + s) / (2 lam gamma) = 2 / (s - u)
  //   theta2 = -d theta1 / d lam
  // The two algebraic forms are used on the side where they do not cancel.
  const double u = gamma - 1.0 - lam;
  const double s = std::sqrt(u * u + 4.0 * lam * gamma);
  const double ds = (2.0 * gamma - u) / s;  // ds/dlam; du/dlam = -1
  double t1 = 0.0;
  double t2 = 0.0;
  if (u <= 0.0) {
    const double q = s - u;
    t1 = 2.0 / q;
    t2 = 2.0 * (ds + 1.0) / (q * q);
  } else {
    t1 = (u + s) / (2.0 * lam * gamma);
    t2 = ((u + s) - lam * (ds - 1.0)) / (2.0 * lam * lam * gamma);
  }
  if (!(t1 > 0.0) || !(t2 > 0.0)) {
    std::ostringstream os;
    os << "theta: non-positive resolvent moment at gamma=" << gamma << ", lam=" << lam;
    throw NumericError(os.str());
  }
  return {t1, t2, at};
}

BarThetaValues theta_bar(double zeta, double lam) {
  const ThetaValues t = theta(zeta, lam);
  return {(1.0 - zeta) / lam + zeta * t.theta1, (1.0 - zeta) / (lam * lam) + zeta * t.theta2, zeta,
          lam};
}

double spectral_moment(std::span<const double> eigenvalues, double lam, int order) {
  if (eigenvalues.empty()) throw ValidationError("spectral_moment: empty spectrum");
  double acc = 0.0;
  for (double e : eigenvalues) acc += std::pow(e + lam, -order);
  return acc / static_cast<double>(eigenvalues.size());
}

RiskReport ridge_risk_theory(const SpectrumParams& params, const ModelParams& model) {
  params.validate();
  model.validate();
  const auto [t1, t2, at] = theta(params.gamma, params.lam);
  const double lam = params.lam;
  const double g = params.gamma;
  const double bias2 = model.alpha2 * lam * lam * t2;
  const double variance = g * model.sigma2 * (t1 - lam * t2);
  const double residual =
      model.alpha2 * lam * lam * (t1 - lam * t2) + model.sigma2 * (1.0 - g + g * lam * lam * t2);
  return RiskReport::from_parts(bias2, variance, residual);
}

double optimal_lambda_ridge(double gamma, const ModelParams& model) {
  model.validate();
  if (!(model.alpha2 > 0.0)) {
    throw ValidationError("optimal_lambda_ridge: alpha2 = 0 makes the optimal penalty infinite");
  }
  if (!(gamma > 0.0)) throw ValidationError("optimal_lambda_ridge: gamma must be positive");
  return gamma * model.sigma2 / model.alpha2;
}

std::vector<RiskReport> bias_variance_curve(double gamma, const ModelParams& model,
                                            std::span<const double> lam_grid) {
  std::vector<RiskReport> out;
  out.reserve(lam_grid.size());
  for (double lam : lam_grid) out.push_back(ridge_risk_theory({gamma, lam}, model));
  return out;
}

}  // namespace ridgesketch
