#include "ridgesketch/det_equiv.hpp"

#include <cmath>
#include <sstream>

#include "ridgesketch/errors.hpp"
#include "ridgesketch/estimators.hpp"

namespace ridgesketch {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// 1 - c - (c/n) sum_i e_i / (c e_i + lam); strictly decreasing in c.
double fixed_point_gap(std::span<const double> spectrum, double n, double lam, double c) {
  double acc = 0.0;
  for (double e : spectrum) acc += e / (c * e + lam);
  return 1.0 - c - c / n * acc;
}

void validate_spectrum(std::span<const double> spectrum, Index n, double lam) {
  if (spectrum.empty()) throw ValidationError("solve_cp: empty spectrum");
  if (n < 1) throw ValidationError("solve_cp: n must be positive");
  if (!(lam > 0.0)) throw ValidationError("solve_cp: lam must be positive");
  for (double e : spectrum) {
    if (!(e > 0.0)) {
      std::ostringstream os;
      os << "solve_cp: spectrum must be positive, found eigenvalue " << e;
      throw ValidationError(os.str());
    }
  }
}

}  // namespace

FixedPointResult solve_cp(std::span<const double> spectrum, Index n, double lam) {
  validate_spectrum(spectrum, n, lam);
  const double dn = static_cast<double>(n);

  double lo = 1e-12;
  double hi = 1.0 - 1e-12;
  constexpr int kScan = 64;
  double prev = fixed_point_gap(spectrum, dn, lam, lo);
  for (int k = 1; k <= kScan; ++k) {
    const double c = lo + (hi - lo) * k / kScan;
    const double g = fixed_point_gap(spectrum, dn, lam, c);
    if (!(g < prev)) throw NumericError("solve_cp: fixed-point map is not monotone");
    prev = g;
  }
  const double g_lo = fixed_point_gap(spectrum, dn, lam, lo);
  const double g_hi = fixed_point_gap(spectrum, dn, lam, hi);
  if (!(g_lo > 0.0 && g_hi < 0.0)) {
    std::ostringstream os;
    os << "solve_cp: no sign change on [" << lo << ", " << hi << "], gaps " << g_lo << ", "
       << g_hi;
    throw NumericError(os.str());
  }

  int iterations = 0;
  while (hi - lo > kFixedPointTol && iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    if (fixed_point_gap(spectrum, dn, lam, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++iterations;
  }
  const double c = 0.5 * (lo + hi);

  // c' = dc/dz at z = -lam:
  //   gamma_p E[c T/(c T + lam)^2] / (-1 - gamma_p lam E[T/(c T + lam)^2])
  const double gamma_p = static_cast<double>(spectrum.size()) / dn;
  double num = 0.0;
  double den = 0.0;
  for (double e : spectrum) {
    const double q = c * e + lam;
    num += c * e / (q * q);
    den += e / (q * q);
  }
  const double m = static_cast<double>(spectrum.size());
  const double c_prime = gamma_p * num / m / (-1.0 - gamma_p * lam * den / m);

  return {c, c_prime, iterations, std::abs(fixed_point_gap(spectrum, dn, lam, c))};
}

double signal_coefficient(double x, const FixedPointResult& fp, double lam) {
  return fp.c * x / (fp.c * x + lam);
}

double noise_kernel_coefficient(double x, const FixedPointResult& fp, double lam) {
  const double q = fp.c * x + lam;
  return x * (fp.c + lam * fp.c_prime) / (q * q);
}

RepresentationPair representation_pair(std::span<const double> spectrum,
                                       const MatrixXd& eigenvectors, Index n, double lam) {
  const auto p = static_cast<Index>(spectrum.size());
  if (eigenvectors.rows() != p || eigenvectors.cols() != p) {
    throw ValidationError("representation_pair: eigenvector basis has the wrong shape");
  }
  const FixedPointResult fp = solve_cp(spectrum, n, lam);

  VectorXd signal(p);
  VectorXd kernel(p);
  VectorXd resolvent(p);
  VectorXd resolvent_sq(p);
  VectorXd correction(p);
  for (Index i = 0; i < p; ++i) {
    const double x = spectrum[static_cast<std::size_t>(i)];
    signal[i] = signal_coefficient(x, fp, lam);
    kernel[i] = noise_kernel_coefficient(x, fp, lam);
    resolvent[i] = 1.0 / (fp.c * x + lam);
    resolvent_sq[i] = resolvent[i] * resolvent[i];
    correction[i] = 1.0 - fp.c_prime * x;
  }
  const MatrixXd& V = eigenvectors;
  const MatrixXd res = V * resolvent.asDiagonal() * V.transpose();
  const MatrixXd res_sq = V * resolvent_sq.asDiagonal() * V.transpose();
  const MatrixXd corr = V * correction.asDiagonal() * V.transpose();

  RepresentationPair out;
  out.signal = V * signal.asDiagonal() * V.transpose();
  out.noise_kernel = V * kernel.asDiagonal() * V.transpose();
  out.noise_kernel_resolvent = res - lam * res_sq * corr;
  out.fixed_point = fp;
  return out;
}

RepresentationPair representation_pair(std::span<const double> spectrum, Index n, double lam) {
  const auto p = static_cast<Index>(spectrum.size());
  return representation_pair(spectrum, MatrixXd::Identity(p, p), n, lam);
}

namespace {

struct SpectralCov {
  std::vector<double> eigenvalues;
  MatrixXd eigenvectors;
  MatrixXd root;  // empty for identity
};

SpectralCov decompose(const CovarianceSpec& cov, Index p) {
  SpectralCov out;
  if (cov.is_identity()) {
    out.eigenvalues.assign(static_cast<std::size_t>(p), 1.0);
    out.eigenvectors = MatrixXd::Identity(p, p);
    return out;
  }
  if (cov.sigma->rows() != p) throw ValidationError("covariance dimension does not match p");
  out.root = spd_sqrt(*cov.sigma);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(*cov.sigma);
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + p);
  for (double& e : out.eigenvalues) e = std::max(e, kEigenvalueFloor);
  out.eigenvectors = es.eigenvectors();
  return out;
}

MatrixXd draw_design(Index n, Index p, const SpectralCov& sc, RngStream rng) {
  MatrixXd u = rng.normal_matrix(n, p);
  if (sc.root.size() == 0) return u;
  return u * sc.root;
}

MatrixXd unit_probes(Index p, int probes, RngStream rng) {
  MatrixXd w = rng.normal_matrix(p, probes);
  w.colwise().normalize();
  return w;
}

}  // namespace

ResolventTestResult resolvent_equivalence_test(Index n, Index p, const CovarianceSpec& cov,
                                               double lam, int probes, int replicates,
                                               RngStream rng) {
  if (n < 1 || p < 1 || probes < 1 || replicates < 1) {
    throw ValidationError("resolvent_equivalence_test: sizes and counts must be positive");
  }
  const SpectralCov sc = decompose(cov, p);
  const FixedPointResult fp = solve_cp(sc.eigenvalues, n, lam);

  VectorXd diag(p);
  double trace2_eq = 0.0;
  for (Index i = 0; i < p; ++i) {
    const double e = sc.eigenvalues[static_cast<std::size_t>(i)];
    const double q = fp.c * e + lam;
    diag[i] = 1.0 / q;
    trace2_eq += (1.0 - fp.c_prime * e) / (q * q);
  }
  trace2_eq /= static_cast<double>(p);
  const MatrixXd equivalent = sc.eigenvectors * diag.asDiagonal() * sc.eigenvectors.transpose();

  const MatrixXd w = unit_probes(p, probes, rng.child(0));
  const VectorXd w_eq = (w.transpose() * equivalent * w).diagonal();

  VectorXd dev_sum = VectorXd::Zero(probes);
  double trace2_sum = 0.0;
  const double dn = static_cast<double>(n);
  for (int r = 0; r < replicates; ++r) {
    const MatrixXd X = draw_design(n, p, sc, rng.child(1000 + static_cast<std::uint64_t>(r)));
    MatrixXd a = MatrixXd::Zero(p, p);
    a.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose(), 1.0 / dn);
    a.diagonal().array() += lam;
    Eigen::LLT<MatrixXd> llt(a.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success) throw NumericError("resolvent_equivalence_test: LLT failed");
    const MatrixXd inv = llt.solve(MatrixXd::Identity(p, p));
    trace2_sum += inv.squaredNorm() / static_cast<double>(p);
    const VectorXd w_emp = (w.transpose() * inv * w).diagonal();
    dev_sum += (w_emp - w_eq).cwiseAbs();
  }

  ResolventTestResult out;
  out.per_probe.resize(static_cast<std::size_t>(probes));
  out.max_deviation = 0.0;
  for (int k = 0; k < probes; ++k) {
    const double d = dev_sum[k] / replicates;
    out.per_probe[static_cast<std::size_t>(k)] = d;
    out.max_deviation = std::max(out.max_deviation, d);
  }
  out.trace2_empirical = trace2_sum / replicates;
  out.trace2_equivalent = trace2_eq;
  return out;
}

RepresentationBiasResult representation_bias_test(Index n, Index p, const CovarianceSpec& cov,
                                                  const VectorXd& beta, double lam, double sigma,
                                                  int probes, int reps, RngStream rng) {
  if (beta.size() != p) throw ValidationError("representation_bias_test: beta length != p");
  if (reps < 2 || probes < 1) {
    throw ValidationError("representation_bias_test: need reps >= 2 and probes >= 1");
  }
  if (sigma < 0.0) throw ValidationError("representation_bias_test: sigma must be >= 0");
  const SpectralCov sc = decompose(cov, p);
  const RepresentationPair pair = representation_pair(sc.eigenvalues, sc.eigenvectors, n, lam);
  const MatrixXd w = unit_probes(p, probes, rng.child(0));
  const VectorXd target = w.transpose() * (pair.signal * beta);

  VectorXd sum = VectorXd::Zero(probes);
  VectorXd sum_sq = VectorXd::Zero(probes);
  for (int r = 0; r < reps; ++r) {
    RngStream rep = rng.child(1000 + static_cast<std::uint64_t>(r));
    const MatrixXd X = draw_design(n, p, sc, rep.child(1));
    VectorXd y = X * beta;
    if (sigma > 0.0) y += rep.child(2).normal_vector(n, sigma);
    const VectorXd proj = w.transpose() * ridge_solve(X, y, lam);
    sum += proj;
    sum_sq += proj.cwiseProduct(proj);
  }

  RepresentationBiasResult out;
  out.max_deviation = 0.0;
  out.max_standard_error = 0.0;
  const double dr = static_cast<double>(reps);
  for (int k = 0; k < probes; ++k) {
    const double mean = sum[k] / dr;
    const double var = std::max(0.0, (sum_sq[k] - dr * mean * mean) / (dr - 1.0));
    const double se = std::sqrt(var / dr);
    const double dev = std::abs(mean - target[k]);
    out.deviation.push_back(dev);
    out.standard_error.push_back(se);
    out.max_deviation = std::max(out.max_deviation, dev);
    out.max_standard_error = std::max(out.max_standard_error, se);
  }
  return out;
}

}  // namespace ridgesketch
