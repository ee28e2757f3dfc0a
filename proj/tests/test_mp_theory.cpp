#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "ridgesketch/errors.hpp"
#include "ridgesketch/mp_theory.hpp"

using namespace ridgesketch;

namespace {
const std::vector<double> kGammas{0.05, 0.2, 0.7, 1.3, 2.0, 5.0};
const std::vector<double> kLams{0.01, 0.1, 0.3, 1.0, 3.0, 20.0};
}  // namespace

TEST_CASE("support endpoints") {
  auto [a, b] = mp_support(0.25);
  CHECK(a == doctest::Approx(0.25));
  CHECK(b == doctest::Approx(2.25));
}

TEST_CASE("theta moments against density quadrature") {
  for (double g : kGammas) {
    for (double l : kLams) {
      const ThetaValues t = theta(g, l);
      CAPTURE(g);
      CAPTURE(l);
      CHECK(t.theta1 == doctest::Approx(oracle::mp_moment_quadrature(g, l, 1)).epsilon(1e-8));
      CHECK(t.theta2 == doctest::Approx(oracle::mp_moment_quadrature(g, l, 2)).epsilon(1e-8));
    }
  }
}

TEST_CASE("theta against the closed forms in z2") {
  for (double g : kGammas) {
    for (double l : {0.1, 0.3, 1.0, 3.0}) {
      const ThetaValues t = theta(g, l);
      CAPTURE(g);
      CAPTURE(l);
      CHECK(t.theta1 == doctest::Approx(oracle::printed_theta1(g, l)).epsilon(1e-9));
      CHECK(t.theta2 == doctest::Approx(oracle::z2_route_theta2(g, l)).epsilon(1e-6));
      CHECK(t.theta2 == doctest::Approx(oracle::printed_theta2(g, l)).epsilon(1e-9));
    }
  }
}

TEST_CASE("theta stays accurate at extreme penalties") {
  // theta1 ~ 1/lam and theta2 ~ 1/lam^2 for large lam; no cancellation
  const ThetaValues big = theta(0.5, 1e8);
  CHECK(big.theta1 * 1e8 == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(big.theta2 * 1e16 == doctest::Approx(1.0).epsilon(1e-7));
  // gamma < 1, lam -> 0: theta1 -> 1/(1 - gamma)
  CHECK(theta(0.5, 1e-10).theta1 == doctest::Approx(2.0).epsilon(1e-6));
  // gamma > 1 keeps the atom: theta1 ~ (1 - 1/gamma)/lam
  CHECK(theta(4.0, 1e-8).theta1 * 1e-8 == doctest::Approx(0.75).epsilon(1e-6));
}

TEST_CASE("stieltjes transform") {
  for (double g : {0.3, 1.0, 2.5}) {
    for (auto z : {std::complex<double>(-0.7, 0.0), std::complex<double>(1.0, 0.5),
                   std::complex<double>(2.0, -0.3), std::complex<double>(12.0, 0.0)}) {
      const auto m = mp_stieltjes(g, z);
      const auto q = oracle::mp_stieltjes_quadrature(g, z);
      CAPTURE(g);
      CAPTURE(z);
      CHECK(std::abs(m - q) < 1e-7 * std::max(1.0, std::abs(q)));
      if (z.imag() > 0) CHECK(m.imag() > 0);
    }
    // theta1(gamma, lam) = m(-lam)
    CHECK(mp_stieltjes(g, {-0.4, 0.0}).real() == doctest::Approx(theta(g, 0.4).theta1));
    const auto [a, b] = mp_support(g);
    CHECK_THROWS_AS(mp_stieltjes(g, {0.5 * (a + b), 0.0}), ValidationError);
  }
  CHECK_THROWS_AS(mp_stieltjes(0.5, {0.0, 0.0}), ValidationError);
}

TEST_CASE("companion moments") {
  const BarThetaValues b = theta_bar(0.6, 0.8);
  const ThetaValues t = theta(0.6, 0.8);
  CHECK(b.bar1 == doctest::Approx(0.4 / 0.8 + 0.6 * t.theta1));
  CHECK(b.bar2 == doctest::Approx(0.4 / 0.64 + 0.6 * t.theta2));
}

TEST_CASE("spectral_moment on a discrete law") {
  const std::vector<double> e{0.5, 1.0, 2.0};
  CHECK(spectral_moment(e, 1.0, 1) == doctest::Approx((1 / 1.5 + 1 / 2.0 + 1 / 3.0) / 3));
  CHECK(spectral_moment(e, 1.0, 2) == doctest::Approx((1 / 2.25 + 1 / 4.0 + 1 / 9.0) / 3));
  CHECK_THROWS_AS(spectral_moment(std::vector<double>{}, 1.0, 1), ValidationError);
}

TEST_CASE("ridge risk theory") {
  const ModelParams m{9.0, 1.0};
  for (double g : {0.2, 2.0}) {
    const double star = optimal_lambda_ridge(g, m);
    CHECK(star == doctest::Approx(g / 9.0));
    // the optimum of the theoretical MSE sits at gamma sigma2 / alpha2
    const double found = oracle::golden_section(
        [&](double l) { return ridge_risk_theory({g, l}, m).mse; }, 1e-4, 10.0, 1e-10);
    CHECK(found == doctest::Approx(star).epsilon(1e-5));
    // at the optimum, MSE = alpha2 lam theta1 (known simplification)
    const ThetaValues t = theta(g, star);
    CHECK(ridge_risk_theory({g, star}, m).mse == doctest::Approx(m.alpha2 * star * t.theta1));
  }
  // large lam: bias2 -> alpha2, variance -> 0
  const RiskReport big = ridge_risk_theory({0.5, 1e7}, m);
  CHECK(big.bias2 == doctest::Approx(9.0).epsilon(1e-5));
  CHECK(big.variance < 1e-6);
  CHECK_THROWS_AS(optimal_lambda_ridge(1.0, {0.0, 1.0}), ValidationError);
}

TEST_CASE("bias-variance curve is monotone in lam") {
  std::vector<double> grid;
  for (int i = 0; i < 30; ++i) grid.push_back(0.01 * std::pow(1.3, i));
  const auto curve = bias_variance_curve(0.7, {1.0, 1.0}, grid);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].bias2 > curve[i - 1].bias2);
    CHECK(curve[i].variance < curve[i - 1].variance);
  }
}
