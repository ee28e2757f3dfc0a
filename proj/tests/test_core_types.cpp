#include <doctest.h>

#include <cmath>

#include "ridgesketch/core_types.hpp"
#include "ridgesketch/errors.hpp"

using namespace ridgesketch;

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(SpectrumParams{0.5, 1.0}.validate());
  CHECK_THROWS_AS((SpectrumParams{0.0, 1.0}.validate()), ValidationError);
  CHECK_THROWS_AS((SpectrumParams{0.5, 0.0}.validate()), ValidationError);
  CHECK_NOTHROW(SpectrumParams{0.5, 0.0}.validate(true));
  CHECK_THROWS_AS((SpectrumParams{0.5, -1.0}.validate(true)), ValidationError);
  CHECK_NOTHROW(ModelParams{0.0, 1.0}.validate());
  CHECK_THROWS_AS((ModelParams{-1.0, 1.0}.validate()), ValidationError);
  CHECK_THROWS_AS((ModelParams{1.0, 0.0}.validate()), ValidationError);
  CHECK((ModelParams{9.0, 3.0}.snr()) == doctest::Approx(3.0));
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  const auto ma = a.normal_matrix(5, 4);
  CHECK(ma == b.normal_matrix(5, 4));
  CHECK(ma != c.normal_matrix(5, 4));
  CHECK(ma != d.normal_matrix(5, 4));
  // child() is a pure function of (seed, stream, tag) and does not advance the parent
  RngStream p(1, 2);
  const auto c1 = p.child(3).normal_vector(6);
  p.normal();
  CHECK(c1 == p.child(3).normal_vector(6));
  CHECK(c1 != p.child(4).normal_vector(6));
}

TEST_CASE("normal draws have the right moments") {
  RngStream r(5, 0);
  const auto v = r.normal_vector(200000, 2.0);
  const double mean = v.mean();
  const double var = (v.array() - mean).square().mean();
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("spd_sqrt") {
  Eigen::MatrixXd s(3, 3);
  s << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 3;
  const auto r = spd_sqrt(s);
  CHECK((r * r - s).norm() < 1e-12);
  CHECK((r - r.transpose()).norm() < 1e-14);

  Eigen::MatrixXd asym = s;
  asym(0, 1) = 0.9;
  CHECK_THROWS_AS(spd_sqrt(asym), ValidationError);
  Eigen::MatrixXd indef = Eigen::MatrixXd::Identity(2, 2);
  indef(1, 1) = -0.5;
  CHECK_THROWS_WITH_AS(spd_sqrt(indef), doctest::Contains("-0.5"), ValidationError);
}

TEST_CASE("generate_problem") {
  const ModelParams m{4.0, 1.0};
  const auto prob = generate_problem(300, 400, m, CovarianceSpec::identity(), RngStream(9, 1));
  CHECK(prob.n() == 300);
  CHECK(prob.p() == 400);
  CHECK(prob.beta.size() == 400);
  CHECK(prob.sigma == doctest::Approx(1.0));
  // ||beta||^2 concentrates around alpha2
  CHECK(prob.beta.squaredNorm() == doctest::Approx(4.0).epsilon(0.25));
  const auto again = generate_problem(300, 400, m, CovarianceSpec::identity(), RngStream(9, 1));
  CHECK(again.X == prob.X);
  CHECK(again.beta == prob.beta);

  const auto y = draw_response(prob, RngStream(9, 2));
  CHECK(y.size() == 300);
  const double resid_var = (y - prob.X * prob.beta).squaredNorm() / 300.0;
  CHECK(resid_var == doctest::Approx(1.0).epsilon(0.25));

  // explicit covariance: empirical covariance of the rows approaches Sigma
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.6, 0.6, 2.0;
  const auto cp = generate_problem(40000, 2, m, CovarianceSpec::explicit_matrix(sigma), RngStream(3, 3));
  const Eigen::MatrixXd emp = cp.X.transpose() * cp.X / 40000.0;
  CHECK((emp - sigma).cwiseAbs().maxCoeff() < 0.05);

  CHECK_THROWS_AS(generate_problem(0, 3, m, CovarianceSpec::identity(), RngStream(1, 1)),
                  ValidationError);
}

TEST_CASE("noiseless responses skip the noise draw") {
  auto prob = generate_problem(20, 5, {1.0, 1.0}, CovarianceSpec::identity(), RngStream(1, 1));
  prob.sigma = 0.0;
  CHECK((draw_response(prob, RngStream(1, 2)) - prob.X * prob.beta).norm() == 0.0);
}
