#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "ridgesketch/cross_validation.hpp"
#include "ridgesketch/errors.hpp"

using namespace ridgesketch;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("ridge path matches a naive solve and leverage matches the hat matrix") {
  for (auto [n, p] : {std::pair{30, 10}, std::pair{10, 30}}) {
    const MatrixXd X = gaussian_design(n, p, RngStream(1, n));
    const VectorXd y = RngStream(2, n).normal_vector(n);
    const RidgePath path(X, y);
    for (double lam : {0.05, 0.5, 5.0}) {
      CHECK((path.coefficients(lam) - oracle::naive_ridge(X, y, lam)).norm() < 1e-9);
      MatrixXd a = X.transpose() * X;
      a.diagonal().array() += n * lam;
      const MatrixXd S = X * a.inverse() * X.transpose();
      CHECK((path.leverage(lam) - S.diagonal()).norm() < 1e-10);
    }
  }
}

TEST_CASE("loo shortcut equals brute-force refits") {
  for (int inst = 0; inst < 20; ++inst) {
    RngStream rng(77, inst);
    const int n = 8 + inst * 2;  // up to 46
    const int p = 2 + (inst * 7) % 40;
    const MatrixXd X = gaussian_design(n, p, rng.child(1));
    const VectorXd y = rng.child(2).normal_vector(n);
    const std::vector<double> grid{0.01, 0.1, 1.0, 10.0};
    const LooResult r = loo_shortcut(X, y, grid);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      CAPTURE(inst);
      CHECK(std::abs(r.loo_curve[g] - oracle::brute_force_loo(X, y, grid[g])) <=
            1e-8 * std::max(1.0, r.loo_curve[g]));
    }
  }
}

TEST_CASE("loo at huge lam approaches the zero predictor") {
  const MatrixXd X = gaussian_design(40, 5, RngStream(3, 1));
  const VectorXd y = RngStream(3, 2).normal_vector(40);
  const LooResult r = loo_shortcut(X, y, {1e9});
  CHECK(r.loo_curve[0] == doctest::Approx(y.squaredNorm() / 40).epsilon(1e-6));
}

TEST_CASE("loo rejects full leverage") {
  const MatrixXd X = gaussian_design(5, 20, RngStream(4, 1));
  const VectorXd y = RngStream(4, 2).normal_vector(5);
  CHECK_THROWS_AS(loo_shortcut(X, y, {1e-15}), NumericError);
}

TEST_CASE("folds partition the rows and drop the remainder") {
  Eigen::Index dropped = -1;
  const auto folds = make_folds(23, 5, RngStream(5, 5), &dropped);
  CHECK(dropped == 3);
  std::set<Eigen::Index> seen;
  for (const auto& f : folds) {
    CHECK(f.size() == 4);
    seen.insert(f.begin(), f.end());
  }
  CHECK(seen.size() == 20);
  // deterministic in the seed, different across seeds
  CHECK(make_folds(23, 5, RngStream(5, 5)) == folds);
  CHECK(make_folds(23, 5, RngStream(6, 5)) != folds);
}

TEST_CASE("kfold_cv report") {
  const MatrixXd X = gaussian_design(103, 20, RngStream(6, 1));
  const VectorXd beta = RngStream(6, 2).normal_vector(20, 0.3);
  const VectorXd y = X * beta + RngStream(6, 3).normal_vector(103);
  const auto grid = default_lambda_grid(20.0 / 103, ModelParams{1.8, 1.0});
  const CvReport r = kfold_cv(X, y, grid, 5, RngStream(6, 4));
  CHECK(r.fold_errors.rows() == 5);
  CHECK(r.fold_errors.cols() == static_cast<Eigen::Index>(grid.size()));
  CHECK(r.dropped_rows == 3);
  CHECK_FALSE(r.warnings.empty());
  CHECK(std::find(grid.begin(), grid.end(), r.lam_cv) != grid.end());
  CHECK(r.lam_debiased / r.lam_cv == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(r.lam_debiased < r.lam_cv);
  CHECK(r.lam_one_se >= r.lam_cv);

  // fold errors are validation MSEs of the fold fit with penalty n1 lam
  const auto folds = make_folds(103, 5, RngStream(6, 4));
  std::vector<Eigen::Index> train;
  for (int j = 1; j < 5; ++j) train.insert(train.end(), folds[j].begin(), folds[j].end());
  MatrixXd xt(80, 20);
  VectorXd yt(80);
  for (int i = 0; i < 80; ++i) {
    xt.row(i) = X.row(train[i]);
    yt[i] = y[train[i]];
  }
  const VectorXd b = oracle::naive_ridge(xt, yt, grid[7]);
  double err = 0.0;
  for (auto i : folds[0]) err += std::pow(y[i] - X.row(i).dot(b), 2);
  CHECK(r.fold_errors(0, 7) == doctest::Approx(err / 20).epsilon(1e-10));
}

TEST_CASE("single-point grid and boundary flag") {
  const MatrixXd X = gaussian_design(50, 5, RngStream(7, 1));
  const VectorXd y = RngStream(7, 2).normal_vector(50);
  const CvReport one = kfold_cv(X, y, {0.3}, 5, RngStream(7, 3));
  CHECK(one.lam_cv == 0.3);
  CHECK_FALSE(one.argmin_on_boundary);
  // pure noise response: the largest penalty wins, flagged as boundary
  const CvReport edge = kfold_cv(X, y, {1e-3, 1e-2, 1e-1}, 5, RngStream(7, 3));
  CHECK(edge.argmin_on_boundary);
  CHECK_THROWS_AS(kfold_cv(X, y, {0.2, 0.1}, 5, RngStream(7, 3)), ValidationError);
  CHECK_THROWS_AS(kfold_cv(X, y, {0.1}, 1, RngStream(7, 3)), ValidationError);
  CHECK_THROWS_AS(kfold_cv(X, y, {-0.1}, 5, RngStream(7, 3)), ValidationError);
}

TEST_CASE("train-test validation") {
  const MatrixXd X = gaussian_design(100, 10, RngStream(8, 1));
  const VectorXd y = X * VectorXd::Ones(10) * 0.3 + RngStream(8, 2).normal_vector(100);
  const CvReport r = train_test_validate(X, y, {0.01, 0.1, 1.0}, 0.8, RngStream(8, 3));
  CHECK(r.fold_errors.rows() == 1);
  CHECK(r.debias_factor == 0.8);
  CHECK(r.lam_debiased == doctest::Approx(0.8 * r.lam_cv));
  CHECK_THROWS_AS(train_test_validate(X, y, {0.1}, 1.0, RngStream(8, 3)), ValidationError);
}

TEST_CASE("averaged fold estimator") {
  // replicated blocks: every training set holds the same rows with the same multiplicity
  const MatrixXd block = gaussian_design(6, 3, RngStream(9, 1));
  const VectorXd yb = RngStream(9, 2).normal_vector(6);
  const int K = 4;
  // place one copy of the block in each fold
  const auto folds = make_folds(6 * K, K, RngStream(9, 3));
  MatrixXd Xf(6 * K, 3);
  VectorXd yf(6 * K);
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < 6; ++i) {
      Xf.row(folds[k][i]) = block.row(i);
      yf[folds[k][i]] = yb[i];
    }
  }
  const VectorXd avg = averaged_fold_estimator(Xf, yf, 0.2, K, RngStream(9, 3));
  MatrixXd xt(6 * (K - 1), 3);
  VectorXd yt(6 * (K - 1));
  for (int k = 0; k < K - 1; ++k) {
    xt.middleRows(6 * k, 6) = block;
    yt.segment(6 * k, 6) = yb;
  }
  CHECK((avg - oracle::naive_ridge(xt, yt, 0.2)).norm() < 1e-10);

  // linear in Y
  const VectorXd y2 = RngStream(9, 4).normal_vector(6 * K);
  const VectorXd lhs = averaged_fold_estimator(Xf, 2.0 * yf + y2, 0.2, K, RngStream(9, 3));
  const VectorXd rhs = 2.0 * avg + averaged_fold_estimator(Xf, y2, 0.2, K, RngStream(9, 3));
  CHECK((lhs - rhs).norm() < 1e-10);
}

TEST_CASE("default grid") {
  const auto g = default_lambda_grid(0.7, ModelParams{1.0, 1.0});
  CHECK(g.size() == 40);
  CHECK(g.front() == doctest::Approx(0.7 / 30));
  CHECK(g.back() == doctest::Approx(0.7 * 30));
  const auto u = default_lambda_grid(std::nullopt, std::nullopt);
  CHECK(u.front() == doctest::Approx(1e-3));
  CHECK(u.back() == doctest::Approx(1e2));
}
