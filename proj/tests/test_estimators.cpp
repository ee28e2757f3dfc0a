#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ridgesketch/errors.hpp"
#include "ridgesketch/estimators.hpp"

using namespace ridgesketch;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("ridge map agrees with a naive solve in both shapes") {
  for (auto [n, p] : {std::pair{40, 15}, std::pair{15, 40}}) {
    const MatrixXd X = gaussian_design(n, p, RngStream(1, n));
    const VectorXd y = RngStream(2, n).normal_vector(n);
    const double lam = 0.37;
    const VectorXd ref = oracle::naive_ridge(X, y, lam);
    CHECK((ridge_map(X, lam).estimate(y) - ref).norm() < 1e-10);
    CHECK((ridge_solve(X, y, lam) - ref).norm() < 1e-10);
    // primal and dual forms are the same map
    CHECK((ridge_map_primal(X, lam).T - ridge_map_dual(X, lam).T).norm() < 1e-10);
  }
}

TEST_CASE("ridge at lam = 0 needs full column rank") {
  const MatrixXd X = gaussian_design(30, 5, RngStream(3, 1));
  const VectorXd y = RngStream(3, 2).normal_vector(30);
  const VectorXd ols = X.colPivHouseholderQr().solve(y);
  CHECK((ridge_map(X, 0.0).estimate(y) - ols).norm() < 1e-10);
  MatrixXd deficient = X;
  deficient.col(4) = deficient.col(0) + deficient.col(1);
  CHECK_THROWS_AS(ridge_map(deficient, 0.0), ValidationError);
  CHECK_THROWS_AS(ridge_map(gaussian_design(5, 30, RngStream(3, 3)), 0.0), ValidationError);
  CHECK_THROWS_AS(ridge_map(X, -1.0), ValidationError);
}

TEST_CASE("orthogonal sketches have orthonormal rows") {
  for (auto fam : {SketchFamily::subsample, SketchFamily::haar, SketchFamily::srht}) {
    for (auto [m, n] : {std::pair{10, 64}, std::pair{17, 50}, std::pair{50, 50}}) {
      const MatrixXd L = make_sketch(fam, m, n, RngStream(4, m * 100 + n));
      REQUIRE(L.rows() == m);
      REQUIRE(L.cols() == n);
      CHECK((L * L.transpose() - MatrixXd::Identity(m, m)).norm() < 1e-10);
    }
    CHECK_THROWS_AS(make_sketch(fam, 11, 10, RngStream(1, 1)), ValidationError);
    CHECK(make_sketch(fam, 0, 10, RngStream(1, 1)).rows() == 0);
  }
}

TEST_CASE("subsample sketch picks distinct coordinates") {
  const MatrixXd L = make_sketch(SketchFamily::subsample, 20, 30, RngStream(5, 5));
  CHECK((L.array() == 1.0).count() == 20);
  CHECK((L.array() == 0.0).count() == 20 * 30 - 20);
  CHECK((L.colwise().sum().array() <= 1.0).all());
}

TEST_CASE("haar sketch is rotation invariant in distribution") {
  // E[L'L] = (m/n) I for a Haar m x n sketch
  MatrixXd acc = MatrixXd::Zero(8, 8);
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    const MatrixXd L = make_sketch(SketchFamily::haar, 3, 8, RngStream(6, r));
    acc += L.transpose() * L;
  }
  acc /= reps;
  CHECK((acc - 3.0 / 8.0 * MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("gaussian sketch scaling") {
  MatrixXd acc = MatrixXd::Zero(6, 6);
  const int reps = 3000;
  for (int r = 0; r < reps; ++r) {
    const MatrixXd L = make_sketch(SketchFamily::gaussian, 4, 6, RngStream(7, r));
    acc += L.transpose() * L;
  }
  acc /= reps;
  CHECK((acc - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 0.06);
  // rows > cols is allowed for gaussian
  CHECK(make_sketch(SketchFamily::gaussian, 9, 6, RngStream(1, 1)).rows() == 9);
}

TEST_CASE("sketched maps match their defining formulas") {
  const int n = 30, p = 12;
  const MatrixXd X = gaussian_design(n, p, RngStream(8, 1));
  const double lam = 0.6;
  const MatrixXd L = make_sketch(SketchFamily::haar, 18, n, RngStream(8, 2));
  const MatrixXd Ip = MatrixXd::Identity(p, p);

  const MatrixXd primal_ref =
      (X.transpose() * L.transpose() * L * X / n + lam * Ip).inverse() * X.transpose() / n;
  CHECK((primal_sketch_map(X, lam, L).T - primal_ref).norm() < 1e-10);

  const MatrixXd full_ref = (X.transpose() * L.transpose() * L * X / n + lam * Ip).inverse() *
                            X.transpose() * L.transpose() * L / n;
  CHECK((full_sketch_map(X, lam, L).T - full_ref).norm() < 1e-10);

  const MatrixXd R = make_sketch(SketchFamily::haar, 7, p, RngStream(8, 3)).transpose();
  const MatrixXd dual_ref =
      X.transpose() * (X * R * R.transpose() * X.transpose() / n + lam * MatrixXd::Identity(n, n)).inverse() / n;
  CHECK((dual_sketch_map(X, lam, R).T - dual_ref).norm() < 1e-10);

  CHECK((marginal_map(X, lam).T - X.transpose() / (n * lam)).norm() < 1e-14);
}

TEST_CASE("primal sketch in the p > m regime uses the push-through identity") {
  const int n = 20, p = 35;
  const MatrixXd X = gaussian_design(n, p, RngStream(9, 1));
  const MatrixXd L = make_sketch(SketchFamily::srht, 8, n, RngStream(9, 2));
  const double lam = 1.3;
  const MatrixXd ref = (X.transpose() * L.transpose() * L * X / n + lam * MatrixXd::Identity(p, p))
                           .inverse() * X.transpose() / n;
  CHECK((primal_sketch_map(X, lam, L).T - ref).norm() < 1e-10);
}

TEST_CASE("empty sketches reduce to the marginal map or zero") {
  const MatrixXd X = gaussian_design(10, 4, RngStream(10, 1));
  const MatrixXd L0(0, 10);
  CHECK((primal_sketch_map(X, 0.5, L0).T - marginal_map(X, 0.5).T).norm() < 1e-14);
  CHECK(full_sketch_map(X, 0.5, L0).T.norm() == 0.0);
  const MatrixXd R0(4, 0);
  CHECK((dual_sketch_map(X, 0.5, R0).T - marginal_map(X, 0.5).T).norm() < 1e-14);
}

TEST_CASE("full sketch with ratio 1 is ridge") {
  const MatrixXd X = gaussian_design(25, 10, RngStream(11, 1));
  const auto est = sketched_estimator(X, 0.4, {SketchKind::full, SketchFamily::haar, 1.0}, RngStream(11, 2));
  CHECK((est.T - ridge_map(X, 0.4).T).norm() < 1e-10);
  const auto dual = sketched_estimator(X, 0.4, {SketchKind::dual, SketchFamily::haar, 1.0}, RngStream(11, 3));
  CHECK((dual.T - ridge_map(X, 0.4).T).norm() < 1e-10);
}

TEST_CASE("sketch spec validation") {
  CHECK_THROWS_AS((SketchSpec{SketchKind::primal, SketchFamily::haar, 0.0}.validate()), ValidationError);
  CHECK_THROWS_AS((SketchSpec{SketchKind::primal, SketchFamily::haar, 1.5}.validate()), ValidationError);
  CHECK_NOTHROW((SketchSpec{SketchKind::marginal, SketchFamily::haar, 0.0}.validate()));
  CHECK(parse_sketch_family("srht") == SketchFamily::srht);
  CHECK(parse_sketch_kind("dual") == SketchKind::dual);
  CHECK_THROWS_AS(parse_sketch_family("fourier"), ValidationError);
}

TEST_CASE("linear_risk matches a Monte Carlo over beta and noise") {
  for (auto [n, p] : {std::pair{12, 5}, std::pair{5, 12}}) {
    const MatrixXd X = gaussian_design(n, p, RngStream(12, n));
    const auto est = ridge_map(X, 0.8);
    const ModelParams m{2.0, 0.5};
    const RiskReport r = linear_risk(est, X, m);
    const double mc = oracle::mc_linear_mse(est.T, X, m.alpha2, m.sigma2, 200000, 17);
    CHECK(r.mse == doctest::Approx(mc).epsilon(0.01));
    CHECK(r.mse == doctest::Approx(r.bias2 + r.variance));
    // residual against direct trace formulas
    const MatrixXd In = MatrixXd::Identity(n, n);
    const MatrixXd A = In - X * est.T;
    const double resid = m.alpha2 / p * (A * X).squaredNorm() / n + m.sigma2 / n * A.squaredNorm();
    REQUIRE(r.residual.has_value());
    CHECK(*r.residual == doctest::Approx(resid).epsilon(1e-10));
  }
}
