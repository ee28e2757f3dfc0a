#include "ridgesketch/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "ridgesketch/errors.hpp"

namespace ridgesketch {

using Eigen::Index;
using Eigen::MatrixXd;

std::string_view to_string(SketchKind kind) {
  switch (kind) {
    case SketchKind::primal: return "primal";
    case SketchKind::dual: return "dual";
    case SketchKind::full: return "full";
    case SketchKind::marginal: return "marginal";
  }
  return "?";
}

std::string_view to_string(SketchFamily family) {
  switch (family) {
    case SketchFamily::subsample: return "subsample";
    case SketchFamily::haar: return "haar";
    case SketchFamily::srht: return "srht";
    case SketchFamily::gaussian: return "gaussian";
  }
  return "?";
}

SketchKind parse_sketch_kind(std::string_view text) {
  for (auto k : {SketchKind::primal, SketchKind::dual, SketchKind::full, SketchKind::marginal}) {
    if (to_string(k) == text) return k;
  }
  throw ValidationError("unknown sketch kind '" + std::string(text) + "'");
}

SketchFamily parse_sketch_family(std::string_view text) {
  for (auto f : {SketchFamily::subsample, SketchFamily::haar, SketchFamily::srht,
                 SketchFamily::gaussian}) {
    if (to_string(f) == text) return f;
  }
  throw ValidationError("unknown sketch family '" + std::string(text) + "'");
}

void SketchSpec::validate() const {
  if (kind == SketchKind::marginal) return;
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    std::ostringstream os;
    os << "sketch ratio must lie in (0, 1], got " << ratio;
    throw ValidationError(os.str());
  }
}

Eigen::VectorXd LinearEstimator::estimate(const Eigen::VectorXd& y) const {
  if (y.size() != T.cols()) throw ValidationError("response length does not match estimator");
  return T * y;
}

namespace {

void require_positive_lam(double lam, const char* who) {
  if (!(lam > 0.0) || !std::isfinite(lam)) {
    std::ostringstream os;
    os << who << ": lam must be positive, got " << lam;
    throw ValidationError(os.str());
  }
}

// Cholesky of a symmetric matrix; throws NumericError on failure.
Eigen::LLT<MatrixXd> factor_spd(const MatrixXd& a, const char* who) {
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericError(std::string(who) + ": Cholesky factorization failed");
  }
  return llt;
}

// Symmetric X'X (or XX' when transposed) via a rank update.
MatrixXd gram_cols(const MatrixXd& X) {
  MatrixXd g = MatrixXd::Zero(X.cols(), X.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  return g.selfadjointView<Eigen::Lower>();
}

MatrixXd gram_rows(const MatrixXd& X) {
  MatrixXd g = MatrixXd::Zero(X.rows(), X.rows());
  g.selfadjointView<Eigen::Lower>().rankUpdate(X);
  return g.selfadjointView<Eigen::Lower>();
}

std::string label_with(std::string_view base, double lam) {
  std::ostringstream os;
  os << base << "(lam=" << lam << ")";
  return os.str();
}

void check_ols_rank(const MatrixXd& X) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
  if (qr.rank() < X.cols()) {
    std::ostringstream os;
    os << "ridge_map: lam = 0 requires full column rank, but rank(X) = " << qr.rank()
       << " < p = " << X.cols();
    throw ValidationError(os.str());
  }
}

}  // namespace

LinearEstimator ridge_map_primal(const MatrixXd& X, double lam) {
  const double n = static_cast<double>(X.rows());
  MatrixXd a = gram_cols(X) / n;
  a.diagonal().array() += lam;
  auto llt = factor_spd(a, "ridge_map");
  return {llt.solve(X.transpose()) / n, label_with("ridge", lam)};
}

LinearEstimator ridge_map_dual(const MatrixXd& X, double lam) {
  require_positive_lam(lam, "ridge_map_dual");
  const double n = static_cast<double>(X.rows());
  MatrixXd m = gram_rows(X) / n;
  m.diagonal().array() += lam;
  auto llt = factor_spd(m, "ridge_map");
  // M is symmetric, so X' M^{-1} = (M^{-1} X)'.
  return {llt.solve(X).transpose() / n, label_with("ridge", lam)};
}

LinearEstimator ridge_map(const MatrixXd& X, double lam) {
  if (X.rows() < 1 || X.cols() < 1) throw ValidationError("ridge_map: empty design");
  if (lam < 0.0 || !std::isfinite(lam)) {
    throw ValidationError("ridge_map: lam must be nonnegative and finite");
  }
  if (lam == 0.0) {
    check_ols_rank(X);
    return ridge_map_primal(X, 0.0);
  }
  return X.cols() <= X.rows() ? ridge_map_primal(X, lam) : ridge_map_dual(X, lam);
}

Eigen::VectorXd ridge_solve(const MatrixXd& X, const Eigen::VectorXd& y, double lam) {
  require_positive_lam(lam, "ridge_solve");
  if (y.size() != X.rows()) throw ValidationError("ridge_solve: response length mismatch");
  const double n = static_cast<double>(X.rows());
  if (X.cols() <= X.rows()) {
    MatrixXd a = gram_cols(X) / n;
    a.diagonal().array() += lam;
    return factor_spd(a, "ridge_solve").solve(X.transpose() * y) / n;
  }
  MatrixXd m = gram_rows(X) / n;
  m.diagonal().array() += lam;
  return X.transpose() * factor_spd(m, "ridge_solve").solve(y) / n;
}

LinearEstimator marginal_map(const MatrixXd& X, double lam) {
  require_positive_lam(lam, "marginal_map");
  const double n = static_cast<double>(X.rows());
  return {X.transpose() / (n * lam), label_with("marginal", lam)};
}

namespace {

// Thin orthonormal basis of the column space of a (tall) matrix with the R
// diagonal made positive, so the result is a deterministic function of a.
MatrixXd orthonormal_columns(const MatrixXd& a) {
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(a.rows(), a.cols());
  const MatrixXd& r = qr.matrixQR();
  for (Index j = 0; j < a.cols(); ++j) {
    const double d = r(j, j);
    if (std::abs(d) < 1e-12) throw NumericError("sketch construction hit a rank-deficient basis");
    if (d < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

std::vector<Index> sample_without_replacement(Index count, Index population, RngStream& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(population));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, population - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng.engine()))]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

}  // namespace

MatrixXd make_sketch(SketchFamily family, Index rows, Index cols, RngStream rng) {
  if (rows < 0 || cols < 1) throw ValidationError("make_sketch: invalid shape");
  if (family != SketchFamily::gaussian && rows > cols) {
    std::ostringstream os;
    os << "make_sketch: orthogonal family " << to_string(family) << " needs rows <= cols, got "
       << rows << " > " << cols;
    throw ValidationError(os.str());
  }
  if (rows == 0) return MatrixXd(0, cols);

  switch (family) {
    case SketchFamily::subsample: {
      MatrixXd l = MatrixXd::Zero(rows, cols);
      const auto idx = sample_without_replacement(rows, cols, rng);
      for (Index i = 0; i < rows; ++i) l(i, idx[static_cast<std::size_t>(i)]) = 1.0;
      return l;
    }
    case SketchFamily::haar: {
      return orthonormal_columns(rng.normal_matrix(cols, rows)).transpose();
    }
    case SketchFamily::srht: {
      const auto padded = static_cast<Index>(std::bit_ceil(static_cast<std::uint64_t>(cols)));
      if (padded > kSrhtMaxPadded) {
        std::ostringstream os;
        os << "make_sketch: srht padding to " << padded << " columns exceeds the budget of "
           << kSrhtMaxPadded;
        throw ValidationError(os.str());
      }
      // the truncated rows can still be dependent when cols < padded, so redraw
      for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<double> signs(static_cast<std::size_t>(cols));
        for (auto& s : signs) s = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const auto picked = sample_without_replacement(rows, padded, rng);
        // a random column embedding; the leading columns alone are often rank-deficient
        std::vector<Index> embed(static_cast<std::size_t>(cols));
        std::iota(embed.begin(), embed.end(), Index{0});
        if (padded != cols) embed = sample_without_replacement(cols, padded, rng);
        const double scale = 1.0 / std::sqrt(static_cast<double>(padded));
        MatrixXd l(rows, cols);
        for (Index i = 0; i < rows; ++i) {
          const auto h = static_cast<std::uint64_t>(picked[static_cast<std::size_t>(i)]);
          for (Index j = 0; j < cols; ++j) {
            const bool odd = std::popcount(h & static_cast<std::uint64_t>(embed[static_cast<std::size_t>(j)])) & 1;
            l(i, j) = (odd ? -scale : scale) * signs[static_cast<std::size_t>(j)];
          }
        }
        if (padded == cols) return l;
        try {
          return orthonormal_columns(l.transpose()).transpose();
        } catch (const NumericError&) {
        }
      }
      std::ostringstream os;
      os << "make_sketch: no full-rank srht draw of " << rows << " x " << cols << " in 64 attempts";
      throw NumericError(os.str());
    }
    case SketchFamily::gaussian:
      return rng.normal_matrix(rows, cols, 1.0 / std::sqrt(static_cast<double>(rows)));
  }
  throw ValidationError("make_sketch: unknown family");
}

LinearEstimator primal_sketch_map(const MatrixXd& X, double lam, const MatrixXd& L) {
  require_positive_lam(lam, "primal_sketch_map");
  if (L.cols() != X.rows()) throw ValidationError("primal_sketch_map: sketch has wrong width");
  if (L.rows() == 0) return marginal_map(X, lam);
  const double n = static_cast<double>(X.rows());
  const MatrixXd P = L * X;  // m x p
  LinearEstimator out;
  out.label = label_with("primal_sketch", lam);
  if (X.cols() <= P.rows()) {
    MatrixXd a = gram_cols(P) / n;
    a.diagonal().array() += lam;
    out.T = factor_spd(a, "primal_sketch_map").solve(X.transpose()) / n;
  } else {
    // (P'P/n + lam I)^{-1} = (I - P'(PP' + n lam I)^{-1} P) / lam
    MatrixXd small = gram_rows(P);
    small.diagonal().array() += n * lam;
    const MatrixXd inner = factor_spd(small, "primal_sketch_map").solve(P * X.transpose());
    out.T = (X.transpose() - P.transpose() * inner) / (n * lam);
  }
  return out;
}

LinearEstimator dual_sketch_map(const MatrixXd& X, double lam, const MatrixXd& R) {
  require_positive_lam(lam, "dual_sketch_map");
  if (R.rows() != X.cols()) throw ValidationError("dual_sketch_map: sketch has wrong height");
  if (R.cols() == 0) return marginal_map(X, lam);
  const double n = static_cast<double>(X.rows());
  const MatrixXd Q = X * R;  // n x d
  MatrixXd m = gram_rows(Q) / n;
  m.diagonal().array() += lam;
  return {factor_spd(m, "dual_sketch_map").solve(X).transpose() / n,
          label_with("dual_sketch", lam)};
}

LinearEstimator full_sketch_map(const MatrixXd& X, double lam, const MatrixXd& L) {
  require_positive_lam(lam, "full_sketch_map");
  if (L.cols() != X.rows()) throw ValidationError("full_sketch_map: sketch has wrong width");
  const double n = static_cast<double>(X.rows());
  LinearEstimator out;
  out.label = label_with("full_sketch", lam);
  if (L.rows() == 0) {
    out.T = MatrixXd::Zero(X.cols(), X.rows());
    return out;
  }
  const MatrixXd P = L * X;  // m x p
  if (X.cols() <= P.rows()) {
    MatrixXd a = gram_cols(P) / n;
    a.diagonal().array() += lam;
    out.T = factor_spd(a, "full_sketch_map").solve(P.transpose() * L) / n;
  } else {
    // (P'P/n + lam I)^{-1} P' = P'(PP'/n + lam I)^{-1}
    MatrixXd small = gram_rows(P) / n;
    small.diagonal().array() += lam;
    out.T = P.transpose() * factor_spd(small, "full_sketch_map").solve(L) / n;
  }
  return out;
}

LinearEstimator sketched_estimator(const MatrixXd& X, double lam, const SketchSpec& spec,
                                   RngStream rng) {
  spec.validate();
  const auto n = X.rows();
  const auto p = X.cols();
  auto size_of = [&](Index total) {
    return static_cast<Index>(std::llround(spec.ratio * static_cast<double>(total)));
  };
  switch (spec.kind) {
    case SketchKind::primal:
      return primal_sketch_map(X, lam, make_sketch(spec.family, size_of(n), n, rng));
    case SketchKind::full:
      return full_sketch_map(X, lam, make_sketch(spec.family, size_of(n), n, rng));
    case SketchKind::dual:
      return dual_sketch_map(X, lam, make_sketch(spec.family, size_of(p), p, rng).transpose());
    case SketchKind::marginal:
      return marginal_map(X, lam);
  }
  throw ValidationError("sketched_estimator: unknown kind");
}

RiskReport linear_risk(const LinearEstimator& est, const MatrixXd& X, const ModelParams& model,
                       bool with_residual) {
  const MatrixXd& T = est.T;
  const Index n = X.rows();
  const Index p = X.cols();
  if (T.rows() != p || T.cols() != n) {
    std::ostringstream os;
    os << "linear_risk: estimator is " << T.rows() << "x" << T.cols() << " but X is " << n << "x"
       << p;
    throw ValidationError(os.str());
  }
  const double dn = static_cast<double>(n);
  const double dp = static_cast<double>(p);

  double bias_frob = 0.0;      // ||T X - I_p||_F^2
  double fit_frob = 0.0;       // ||(I_n - X T) X||_F^2
  double resid_frob = 0.0;     // ||I_n - X T||_F^2
  const double var_frob = T.squaredNorm();

  if (p <= n) {
    MatrixXd tx = T * X;  // p x p
    const double trace_tx = tx.trace();
    tx.diagonal().array() -= 1.0;
    bias_frob = tx.squaredNorm();
    if (with_residual) {
      const MatrixXd k = gram_cols(X);
      // ||X E||^2 = tr(E' K E) with E = I - T X = -tx
      fit_frob = (k * tx).cwiseProduct(tx).sum();
      // ||I - X T||^2 = n - 2 tr(T X) + tr(K T T')
      const MatrixXd ttt = gram_rows(T);
      resid_frob = dn - 2.0 * trace_tx + k.cwiseProduct(ttt).sum();
    }
  } else {
    const MatrixXd g = gram_rows(X);   // n x n
    const MatrixXd tt = gram_cols(T);  // T'T, n x n
    MatrixXd h = X * T;                // n x n
    const double trace_h = h.trace();
    bias_frob = dp - 2.0 * trace_h + tt.cwiseProduct(g).sum();
    if (with_residual) {
      h = -h;
      h.diagonal().array() += 1.0;  // E = I - X T
      fit_frob = (h * g).cwiseProduct(h).sum();
      resid_frob = h.squaredNorm();
    }
  }
  bias_frob = std::max(bias_frob, 0.0);

  const double bias2 = model.alpha2 / dp * bias_frob;
  const double variance = model.sigma2 * var_frob;
  std::optional<double> residual;
  if (with_residual) {
    residual = model.alpha2 / dp * std::max(fit_frob, 0.0) / dn +
               model.sigma2 / dn * std::max(resid_frob, 0.0);
  }
  return RiskReport::from_parts(bias2, variance, residual);
}

}  // namespace ridgesketch
