#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ridgesketch/errors.hpp"
#include "ridgesketch/mp_theory.hpp"
#include "ridgesketch/sketch_theory.hpp"

using namespace ridgesketch;

TEST_CASE("primal orthogonal sketch with xi = 1 is ridge") {
  const ModelParams m{9.0, 1.0};
  for (double g : {0.3, 2.0}) {
    const RiskReport s = primal_orth_mse(g, 1.0, 0.8, m);
    const RiskReport r = ridge_risk_theory({g, 0.8}, m);
    CHECK(s.bias2 == doctest::Approx(r.bias2).epsilon(1e-12));
    CHECK(s.variance == doctest::Approx(r.variance).epsilon(1e-12));
  }
  CHECK_THROWS_AS(primal_orth_mse(1.0, 0.0, 1.0, m), ValidationError);
  CHECK_THROWS_AS(primal_orth_mse(1.0, 1.2, 1.0, m), ValidationError);
}

TEST_CASE("primal orthogonal theory against quadrature of the MP moments") {
  const ModelParams m{9.0, 1.0};
  const double g = 5.0, xi = 0.5, lam = 1.5;
  const double t1 = oracle::mp_moment_quadrature(g / xi, lam / xi, 1);
  const double t2 = oracle::mp_moment_quadrature(g / xi, lam / xi, 2);
  const double s = lam + xi - 1.0;
  const double bias = m.alpha2 * (s * s + g * (1 - xi)) * t2 / (xi * xi);
  const double var = g * m.sigma2 * (xi * t1 - s * t2) / (xi * xi);
  const RiskReport r = primal_orth_mse(g, xi, lam, m);
  CHECK(r.bias2 == doctest::Approx(bias).epsilon(1e-8));
  CHECK(r.variance == doctest::Approx(var).epsilon(1e-8));
}

TEST_CASE("dual orthogonal sketch at zeta = gamma is ridge") {
  const ModelParams m{9.0, 1.0};
  for (double g : {0.5, 1.5, 4.0}) {
    const RiskReport s = dual_orth_mse(g, g, 1.0, m);
    const RiskReport r = ridge_risk_theory({g, 1.0}, m);
    CHECK(std::abs(s.mse - r.mse) < 1e-10);
  }
  CHECK_THROWS_AS(dual_orth_mse(1.0, 1.5, 1.0, m), ValidationError);
  // dispatch converts d/p to d/n
  const RiskReport via = sketch_theory({1.5, 0.4, 1.0, m, SketchTheoryKind::dual_orth});
  CHECK(via.mse == doctest::Approx(dual_orth_mse(1.5, 0.6, 1.0, m).mse));
}

TEST_CASE("marginal regression closed forms") {
  const ModelParams m{1.0, 1.0};
  const LambdaOptimum opt = marginal_optimum(0.7, m);
  CHECK(opt.lam == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(opt.mse == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
  CHECK(marginal_mse(0.7, opt.lam, m).mse == doctest::Approx(opt.mse).epsilon(1e-13));
  const double found = oracle::golden_section(
      [&](double l) { return marginal_mse(0.7, l, m).mse; }, 0.1, 20.0, 1e-11);
  CHECK(found == doctest::Approx(2.4).epsilon(1e-6));
  // primal sketch tends to the marginal regression as xi -> 0
  const double small = primal_orth_mse(0.7, 1e-6, 2.4, m).mse;
  CHECK(small == doctest::Approx(opt.mse).epsilon(1e-4));
  CHECK_THROWS_AS(marginal_optimum(0.7, {0.0, 1.0}), ValidationError);
}

TEST_CASE("full sketch") {
  const ModelParams m{9.0, 1.0};
  const RiskReport one = full_sketch_mse(0.1, 1.0, 0.3, m);
  CHECK(one.mse == doctest::Approx(ridge_risk_theory({0.1, 0.3}, m).mse).epsilon(1e-12));
  CHECK(full_sketch_optimal_lambda(0.1, m) == doctest::Approx(0.1 / 9.0));
  for (double xi : {0.25, 0.5}) {
    // MSE decreases with xi at fixed lam
    CHECK(full_sketch_mse(0.1, xi, 0.3, m).mse > full_sketch_mse(0.1, xi + 0.25, 0.3, m).mse);
  }
}

TEST_CASE("optimal_lambda_sketch agrees with an independent golden search") {
  const ModelParams m{9.0, 1.0};
  for (auto [kind, ratio] : {std::pair{SketchTheoryKind::primal_orth, 0.5},
                             std::pair{SketchTheoryKind::dual_orth, 0.5},
                             std::pair{SketchTheoryKind::full_orth, 0.25},
                             std::pair{SketchTheoryKind::ridge, 1.0}}) {
    const LambdaOptimum o = optimal_lambda_sketch(kind, 1.5, ratio, m);
    const double ref = oracle::golden_section(
        [&](double l) { return sketch_theory({1.5, ratio, l, m, kind}).mse; }, 1e-4, 30.0, 1e-12);
    CAPTURE(to_string(kind));
    CHECK(o.lam == doctest::Approx(ref).epsilon(1e-5));
  }
  CHECK_THROWS_AS(optimal_lambda_sketch(SketchTheoryKind::dual_gaussian_bias, 1.0, 0.5, m),
                  ValidationError);
}

TEST_CASE("dual gaussian root finding") {
  const DualGaussianBias r = dual_gaussian_bias(0.4, 0.2, 1.0, 1.0);
  CHECK(r.point.residual <= 1e-10);
  CHECK(r.point.m0 > r.point.bracket_lo);
  CHECK(r.point.m0 <= r.point.bracket_hi);
  CHECK(r.point.m0_prime == doctest::Approx(r.point.m0_prime_fd).epsilon(1e-6));
  // analytic derivative of m^{-1} vs a central difference
  const double y = 0.37, h = 1e-6;
  const double fd = (dual_gaussian_inverse_stieltjes(y + h, 0.4, 0.2, 1.0) -
                     dual_gaussian_inverse_stieltjes(y - h, 0.4, 0.2, 1.0)) / (2 * h);
  CHECK(dual_gaussian_inverse_stieltjes_derivative(y, 0.4, 0.2, 1.0) ==
        doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("dual gaussian bias tends to ridge bias for large d") {
  for (double g : {0.4, 2.0}) {
    const double big = dual_gaussian_bias(g, 1e9, 1.0, 1.0).bias2;
    const double ridge = 1.0 * theta(g, 1.0).theta2;  // alpha2 lam^2 theta2
    CHECK(big == doctest::Approx(ridge).epsilon(1e-6));
  }
  // bias grows as the sketch shrinks
  CHECK(dual_gaussian_bias(0.4, 0.08, 1.0, 1.0).bias2 > dual_gaussian_bias(0.4, 0.32, 1.0, 1.0).bias2);
}

TEST_CASE("primal gaussian proxy") {
  const McEstimate a = primal_gaussian_bias(2.0, 0.5, 1.0, 1.0, 200, 6, RngStream(1, 1));
  const McEstimate b = primal_gaussian_bias(2.0, 0.5, 1.0, 1.0, 200, 6, RngStream(1, 1));
  CHECK(a.mean == b.mean);
  CHECK(a.standard_error > 0.0);
  CHECK(a.mean > 0.0);
  CHECK_THROWS_AS(primal_gaussian_bias(0.5, 0.5, 1.0, 1.0, 200, 6, RngStream(1, 1)), ValidationError);
  CHECK_THROWS_AS(primal_gaussian_bias(2.0, 0.5, 1.0, 1.0, 100, 6, RngStream(1, 1)), ValidationError);
}

TEST_CASE("kind names round trip") {
  for (auto k : {SketchTheoryKind::ridge, SketchTheoryKind::primal_orth, SketchTheoryKind::dual_orth,
                 SketchTheoryKind::full_orth, SketchTheoryKind::marginal,
                 SketchTheoryKind::dual_gaussian_bias, SketchTheoryKind::primal_gaussian_bias}) {
    CHECK(parse_sketch_theory_kind(to_string(k)) == k);
  }
}
