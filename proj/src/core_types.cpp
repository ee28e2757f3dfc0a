#include "ridgesketch/core_types.hpp"

#include <cmath>
#include <sstream>

#include "ridgesketch/errors.hpp"

namespace ridgesketch {

void SpectrumParams::validate(bool allow_zero_lam) const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ValidationError("gamma must be positive and finite, got " + std::to_string(gamma));
  }
  const bool lam_ok = allow_zero_lam ? lam >= 0.0 : lam > 0.0;
  if (!lam_ok || !std::isfinite(lam)) {
    throw ValidationError("lam must be positive and finite, got " + std::to_string(lam));
  }
}

void ModelParams::validate() const {
  if (!(alpha2 >= 0.0) || !std::isfinite(alpha2)) {
    throw ValidationError("alpha2 must be nonnegative, got " + std::to_string(alpha2));
  }
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw ValidationError("sigma2 must be positive, got " + std::to_string(sigma2));
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(stream_id ^ 0x6a09e667f3bcc909ULL);
  const std::uint64_t c = splitmix64(a ^ b);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

RngStream RngStream::child(std::uint64_t tag) const {
  return RngStream(seed_, splitmix64(stream_id_ * 0x9e3779b97f4a7c15ULL ^ splitmix64(tag)));
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return uniform_(engine_); }

Eigen::MatrixXd RngStream::normal_matrix(Eigen::Index rows, Eigen::Index cols, double sd) {
  Eigen::MatrixXd m(rows, cols);
  double* data = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) data[i] = sd * normal_(engine_);
  return m;
}

Eigen::VectorXd RngStream::normal_vector(Eigen::Index size, double sd) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = sd * normal_(engine_);
  return v;
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) {
    throw ValidationError("covariance must be square");
  }
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ValidationError("covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigen-decomposition of covariance failed");
  }
  const double min_eig = es.eigenvalues().minCoeff();
  if (!(min_eig > 0.0)) {
    std::ostringstream os;
    os << "covariance is not positive definite: smallest eigenvalue " << min_eig;
    throw ValidationError(os.str());
  }
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(kEigenvalueFloor).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd gaussian_design(Eigen::Index n, Eigen::Index p, RngStream rng) {
  return rng.normal_matrix(n, p);
}

RegressionProblem generate_problem(Eigen::Index n, Eigen::Index p, const ModelParams& model,
                                   const CovarianceSpec& cov, RngStream rng) {
  if (n < 1 || p < 1) {
    throw ValidationError("generate_problem needs n >= 1 and p >= 1");
  }
  model.validate();
  Eigen::MatrixXd root;
  if (!cov.is_identity()) {
    if (cov.sigma->rows() != p) {
      throw ValidationError("covariance dimension does not match p");
    }
    root = spd_sqrt(*cov.sigma);
  }

  RegressionProblem prob;
  prob.seed = rng.seed();
  prob.sigma = std::sqrt(model.sigma2);
  Eigen::MatrixXd u = rng.normal_matrix(n, p);
  prob.X = cov.is_identity() ? std::move(u) : Eigen::MatrixXd(u * root);
  prob.beta = rng.normal_vector(p, std::sqrt(model.alpha2 / static_cast<double>(p)));
  return prob;
}

Eigen::VectorXd draw_response(const RegressionProblem& prob, RngStream rng) {
  if (prob.beta.size() != prob.X.cols()) {
    throw ValidationError("beta length does not match the column count of X");
  }
  Eigen::VectorXd y = prob.X * prob.beta;
  if (prob.sigma > 0.0) y += rng.normal_vector(prob.n(), prob.sigma);
  return y;
}

}  // namespace ridgesketch
