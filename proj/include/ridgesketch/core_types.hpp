#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>

namespace ridgesketch {

/// Point at which Marchenko-Pastur functionals are evaluated: aspect ratio
/// gamma = lim p/n and ridge penalty lam.
struct SpectrumParams {
  double gamma;
  double lam;

  // Throws ValidationError unless gamma > 0 and lam > 0 (or lam >= 0 when
  // allow_zero_lam is set).
  void validate(bool allow_zero_lam = false) const;
};

/// Random-effects model parameters: E||beta||^2 = alpha2, Var(eps_i) = sigma2.
struct ModelParams {
  double alpha2;
  double sigma2;

  void validate() const;
  double snr() const { return alpha2 / sigma2; }
};

/// Reproducible random stream identified by (seed, stream_id).
///
/// The engine state is derived by SplitMix64 mixing of both words, so two
/// streams that differ in either word start from unrelated states. Streams are
/// cheap values; derive per-replicate or per-purpose children with child().
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Deterministic sub-stream keyed by tag. Does not advance this stream.
  RngStream child(std::uint64_t tag) const;

  std::mt19937_64& engine() { return engine_; }

  double normal();
  double uniform();
  // n x m matrix of i.i.d. N(0, sd^2) entries, filled column-major.
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, double sd = 1.0);
  Eigen::VectorXd normal_vector(Eigen::Index size, double sd = 1.0);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

/// Either the identity or an explicit symmetric positive-definite p x p
/// covariance matrix.
struct CovarianceSpec {
  std::optional<Eigen::MatrixXd> sigma;

  static CovarianceSpec identity() { return {}; }
  static CovarianceSpec explicit_matrix(Eigen::MatrixXd m) { return {std::move(m)}; }
  bool is_identity() const { return !sigma.has_value(); }
};

inline constexpr double kEigenvalueFloor = 1e-12;

/// Symmetric square root of an SPD matrix by eigen-decomposition; eigenvalues
/// in (0, kEigenvalueFloor) are lifted to the floor. Rejects non-symmetric or
/// non-positive-definite input, naming the smallest eigenvalue.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& sigma);

/// One synthetic instance of Y = X beta + eps with X = U Sigma^{1/2}.
struct RegressionProblem {
  Eigen::MatrixXd X;
  Eigen::VectorXd beta;
  double sigma;  // noise standard deviation, may be 0
  std::uint64_t seed;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

/// Draws X = U Sigma^{1/2} (U standard normal) and beta_i ~ N(0, alpha2/p).
RegressionProblem generate_problem(Eigen::Index n, Eigen::Index p, const ModelParams& model,
                                   const CovarianceSpec& cov, RngStream rng);

/// Y = X beta + eps with eps_i ~ N(0, sigma^2).
Eigen::VectorXd draw_response(const RegressionProblem& prob, RngStream rng);

/// n x p matrix with i.i.d. standard normal entries.
Eigen::MatrixXd gaussian_design(Eigen::Index n, Eigen::Index p, RngStream rng);

}  // namespace ridgesketch
