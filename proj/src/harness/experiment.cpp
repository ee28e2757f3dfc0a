#include "ridgesketch/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "ridgesketch/cross_validation.hpp"
#include "ridgesketch/det_equiv.hpp"
#include "ridgesketch/errors.hpp"
#include "ridgesketch/harness/dataset.hpp"
#include "ridgesketch/harness/parallel.hpp"
#include "ridgesketch/mp_theory.hpp"
#include "ridgesketch/sketch_theory.hpp"

namespace ridgesketch::harness {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Point {
  double gamma;
  double lam;
  double ratio;
  std::int64_t p;
};

using TheoryFn = std::function<std::vector<double>(const Point&, std::size_t)>;
using ReplicateFn = std::function<std::vector<double>(const Point&, RngStream)>;

struct Plan {
  std::vector<std::string> metrics;
  std::vector<Point> points;
  TheoryFn theory;
  ReplicateFn replicate;
};

ModelParams model_of(const ExperimentConfig& c) { return {c.alpha * c.alpha, c.sigma * c.sigma}; }

std::vector<double> lams_for(const ExperimentConfig& c, double gamma) {
  if (!c.lams.empty()) return c.lams;
  return {optimal_lambda_ridge(gamma, model_of(c))};
}

bool uses_ratio(ExperimentKind k) { return is_sketch_kind(k) && k != ExperimentKind::marginal; }
bool uses_lam(ExperimentKind k) { return k != ExperimentKind::cv && k != ExperimentKind::loo; }

std::vector<Point> make_points(const ExperimentConfig& c) {
  std::vector<Point> pts;
  for (double g : c.gammas) {
    const std::vector<double> lams = uses_lam(c.kind) ? lams_for(c, g) : std::vector<double>{kNaN};
    const std::vector<double> ratios = uses_ratio(c.kind) ? c.ratios : std::vector<double>{kNaN};
    for (double lam : lams) {
      for (double r : ratios) pts.push_back({g, lam, r, c.p_for(g)});
    }
  }
  return pts;
}

CovarianceSpec covariance_of(const ExperimentConfig& c, Index p) {
  if (c.cov_rho == 0.0) return CovarianceSpec::identity();
  MatrixXd s(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) s(i, j) = std::pow(c.cov_rho, static_cast<double>(std::abs(i - j)));
  }
  return CovarianceSpec::explicit_matrix(std::move(s));
}

SketchKind sketch_kind_of(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::primal_orth:
    case ExperimentKind::primal_gaussian: return SketchKind::primal;
    case ExperimentKind::dual_orth:
    case ExperimentKind::dual_gaussian: return SketchKind::dual;
    case ExperimentKind::full: return SketchKind::full;
    default: return SketchKind::marginal;
  }
}

SketchTheoryKind theory_kind_of(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::primal_orth: return SketchTheoryKind::primal_orth;
    case ExperimentKind::dual_orth: return SketchTheoryKind::dual_orth;
    case ExperimentKind::full: return SketchTheoryKind::full_orth;
    case ExperimentKind::marginal: return SketchTheoryKind::marginal;
    default: throw std::logic_error("no orthogonal theory for this kind");
  }
}

Plan ridge_plan(const ExperimentConfig& c) {
  Plan plan;
  plan.metrics = {"bias2", "variance", "mse", "residual"};
  const ModelParams model = model_of(c);
  plan.theory = [model](const Point& pt, std::size_t) {
    const RiskReport r = ridge_risk_theory({pt.gamma, pt.lam}, model);
    return std::vector<double>{r.bias2, r.variance, r.mse, r.residual.value_or(kNaN)};
  };
  const Index n = c.n;
  plan.replicate = [n, model](const Point& pt, RngStream rng) {
    const MatrixXd X = gaussian_design(n, pt.p, rng.child(1));
    const RiskReport r = linear_risk(ridge_map(X, pt.lam), X, model);
    return std::vector<double>{r.bias2, r.variance, r.mse, r.residual.value_or(kNaN)};
  };
  return plan;
}

Plan representation_plan(const ExperimentConfig& c) {
  Plan plan;
  plan.metrics = {"c_p", "resolvent_max_dev", "trace2"};
  const ExperimentConfig cfg = c;
  plan.theory = [cfg](const Point& pt, std::size_t) {
    const CovarianceSpec cov = covariance_of(cfg, pt.p);
    std::vector<double> spec(static_cast<std::size_t>(pt.p), 1.0);
    if (!cov.is_identity()) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(*cov.sigma, Eigen::EigenvaluesOnly);
      spec.assign(es.eigenvalues().data(), es.eigenvalues().data() + pt.p);
    }
    const FixedPointResult fp = solve_cp(spec, cfg.n, pt.lam);
    double t2 = 0.0;
    for (double e : spec) {
      const double q = fp.c * e + pt.lam;
      t2 += (1.0 - fp.c_prime * e) / (q * q);
    }
    return std::vector<double>{fp.c, 0.0, t2 / static_cast<double>(pt.p)};
  };
  plan.replicate = [cfg](const Point& pt, RngStream rng) {
    const CovarianceSpec cov = covariance_of(cfg, pt.p);
    const ResolventTestResult r =
        resolvent_equivalence_test(cfg.n, pt.p, cov, pt.lam, cfg.probes, 1, rng);
    return std::vector<double>{kNaN, r.max_deviation, r.trace2_empirical};
  };
  return plan;
}

Plan orthogonal_sketch_plan(const ExperimentConfig& c) {
  if (c.kind != ExperimentKind::marginal && c.family == SketchFamily::gaussian) {
    throw ValidationError("config: " + std::string(to_string(c.kind)) +
                          " needs an orthogonal family (subsample, haar or srht)");
  }
  Plan plan;
  plan.metrics = {"bias2", "variance", "mse", "mse_ratio", "lam_opt", "mse_opt"};
  const ModelParams model = model_of(c);
  const SketchTheoryKind tk = theory_kind_of(c.kind);
  plan.theory = [model, tk](const Point& pt, std::size_t) {
    const RiskReport r = sketch_theory({pt.gamma, pt.ratio, pt.lam, model, tk});
    const RiskReport ridge = ridge_risk_theory({pt.gamma, pt.lam}, model);
    LambdaOptimum opt{kNaN, kNaN};
    if (model.alpha2 > 0.0) {
      opt = tk == SketchTheoryKind::marginal ? marginal_optimum(pt.gamma, model)
                                             : optimal_lambda_sketch(tk, pt.gamma, pt.ratio, model);
    }
    return std::vector<double>{r.bias2, r.variance, r.mse, r.mse / ridge.mse, opt.lam, opt.mse};
  };
  const Index n = c.n;
  const SketchSpec base{sketch_kind_of(c.kind), c.family, 1.0};
  plan.replicate = [n, model, base](const Point& pt, RngStream rng) {
    const MatrixXd X = gaussian_design(n, pt.p, rng.child(1));
    SketchSpec spec = base;
    if (spec.kind != SketchKind::marginal) spec.ratio = pt.ratio;
    const LinearEstimator est = sketched_estimator(X, pt.lam, spec, rng.child(2));
    const RiskReport r = linear_risk(est, X, model, false);
    const RiskReport ridge = linear_risk(ridge_map(X, pt.lam), X, model, false);
    return std::vector<double>{r.bias2, r.variance, r.mse, r.mse / ridge.mse, kNaN, kNaN};
  };
  return plan;
}

Plan gaussian_sketch_plan(const ExperimentConfig& c) {
  Plan plan;
  const ModelParams model = model_of(c);
  const bool dual = c.kind == ExperimentKind::dual_gaussian;
  const ExperimentConfig cfg = c;
  if (dual) {
    plan.metrics = {"bias2"};
    plan.theory = [model](const Point& pt, std::size_t) {
      return std::vector<double>{
          dual_gaussian_bias(pt.gamma, pt.ratio * pt.gamma, pt.lam, model.alpha2).bias2};
    };
  } else {
    plan.metrics = {"bias2", "proxy_se"};
    plan.theory = [model, cfg](const Point& pt, std::size_t idx) {
      const McEstimate e =
          primal_gaussian_bias(pt.gamma, pt.ratio, pt.lam, model.alpha2, cfg.proxy_n,
                               cfg.proxy_reps, RngStream(cfg.seed, 0x70726f7879ULL + idx));
      return std::vector<double>{e.mean, e.standard_error};
    };
  }
  const Index n = c.n;
  const SketchKind kind = dual ? SketchKind::dual : SketchKind::primal;
  const std::size_t width = plan.metrics.size();
  plan.replicate = [n, model, kind, width](const Point& pt, RngStream rng) {
    const MatrixXd X = gaussian_design(n, pt.p, rng.child(1));
    const LinearEstimator est =
        sketched_estimator(X, pt.lam, {kind, SketchFamily::gaussian, pt.ratio}, rng.child(2));
    std::vector<double> out(width, kNaN);
    out[0] = linear_risk(est, X, model, false).bias2;
    return out;
  };
  return plan;
}

std::vector<double> grid_for(const ExperimentConfig& c, double gamma) {
  if (!c.lam_grid.empty()) return c.lam_grid;
  return default_lambda_grid(gamma, model_of(c), c.grid_points);
}

Plan cv_plan(const ExperimentConfig& c) {
  Plan plan;
  plan.metrics = {"lam_cv",         "lam_debiased",     "test_error_cv",
                  "test_error_debiased", "test_error_delta", "argmin_on_boundary"};
  const ModelParams model = model_of(c);
  const int K = c.folds;
  plan.theory = [model, K](const Point& pt, std::size_t) {
    const double star = optimal_lambda_ridge(pt.gamma, model);
    const double inflated = star * K / (K - 1.0);
    const double e_cv = ridge_risk_theory({pt.gamma, inflated}, model).mse + model.sigma2;
    const double e_db = ridge_risk_theory({pt.gamma, star}, model).mse + model.sigma2;
    return std::vector<double>{inflated, star, e_cv, e_db, e_db - e_cv, 0.0};
  };
  const ExperimentConfig cfg = c;
  plan.replicate = [cfg, model, K](const Point& pt, RngStream rng) {
    const RegressionProblem prob =
        generate_problem(cfg.n, pt.p, model, CovarianceSpec::identity(), rng.child(1));
    const VectorXd y = draw_response(prob, rng.child(2));
    const CvReport rep = kfold_cv(prob.X, y, grid_for(cfg, pt.gamma), K, rng.child(3));
    const RidgePath path(prob.X, y);
    // Isotropic design: out-of-sample prediction error is ||b - beta||^2 + sigma^2.
    const double e_cv = (path.coefficients(rep.lam_cv) - prob.beta).squaredNorm() + model.sigma2;
    const double e_db =
        (path.coefficients(rep.lam_debiased) - prob.beta).squaredNorm() + model.sigma2;
    return std::vector<double>{rep.lam_cv, rep.lam_debiased, e_cv, e_db, e_db - e_cv,
                               rep.argmin_on_boundary ? 1.0 : 0.0};
  };
  return plan;
}

Plan loo_plan(const ExperimentConfig& c) {
  Plan plan;
  plan.metrics = {"lam_loo", "loo_min"};
  const ModelParams model = model_of(c);
  plan.theory = [model](const Point& pt, std::size_t) {
    const double star = optimal_lambda_ridge(pt.gamma, model);
    return std::vector<double>{star, ridge_risk_theory({pt.gamma, star}, model).mse + model.sigma2};
  };
  const ExperimentConfig cfg = c;
  plan.replicate = [cfg, model](const Point& pt, RngStream rng) {
    const RegressionProblem prob =
        generate_problem(cfg.n, pt.p, model, CovarianceSpec::identity(), rng.child(1));
    const VectorXd y = draw_response(prob, rng.child(2));
    const LooResult r = loo_shortcut(prob.X, y, grid_for(cfg, pt.gamma));
    return std::vector<double>{r.lam_loo, r.loo_curve[r.argmin]};
  };
  return plan;
}

Plan make_plan(const ExperimentConfig& c) {
  Plan plan;
  switch (c.kind) {
    case ExperimentKind::ridge_risk:
    case ExperimentKind::bias_variance: plan = ridge_plan(c); break;
    case ExperimentKind::representation: plan = representation_plan(c); break;
    case ExperimentKind::primal_orth:
    case ExperimentKind::dual_orth:
    case ExperimentKind::full:
    case ExperimentKind::marginal: plan = orthogonal_sketch_plan(c); break;
    case ExperimentKind::dual_gaussian:
    case ExperimentKind::primal_gaussian: plan = gaussian_sketch_plan(c); break;
    case ExperimentKind::cv: plan = cv_plan(c); break;
    case ExperimentKind::loo: plan = loo_plan(c); break;
    case ExperimentKind::timing: throw std::logic_error("timing has no plan");
  }
  plan.points = make_points(c);
  return plan;
}

struct Moments {
  double mean;
  double se;
};

Moments aggregate(const std::vector<std::vector<double>>& reps, std::size_t metric) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : reps) {
    if (std::isnan(r[metric])) continue;
    sum += r[metric];
    ++count;
  }
  if (count == 0) return {kNaN, kNaN};
  const double mean = sum / static_cast<double>(count);
  if (count < 2) return {mean, kNaN};
  double ss = 0.0;
  for (const auto& r : reps) {
    if (!std::isnan(r[metric])) ss += (r[metric] - mean) * (r[metric] - mean);
  }
  const double var = ss / static_cast<double>(count - 1);
  return {mean, std::sqrt(var / static_cast<double>(count))};
}

void add_row(Table& t, const ExperimentConfig& c, const Point& pt, std::int64_t n,
             const std::string& metric, double theory, Moments mc) {
  t.add_row({std::string(to_string(c.kind)), n, pt.p, pt.gamma, pt.lam, pt.ratio, metric, theory,
             mc.mean, mc.se, static_cast<std::int64_t>(c.replicates),
             static_cast<std::int64_t>(c.seed)});
}

Table dataset_cv_table(const ExperimentConfig& c) {
  const Dataset data = ingest_csv(c.data, c.response, c.standardize);
  const double gamma =
      static_cast<double>(data.X.cols()) / static_cast<double>(data.X.rows());
  const std::vector<double> grid =
      c.lam_grid.empty() ? default_lambda_grid(std::nullopt, std::nullopt, c.grid_points)
                         : c.lam_grid;
  std::vector<std::uint64_t> seeds;
  const int count = std::max(1, c.replicates);
  for (int r = 0; r < count; ++r) seeds.push_back(splitmix64(c.seed + static_cast<std::uint64_t>(r)));
  const CvDatasetSummary s = cv_on_dataset(data, c.folds, grid, c.test_fraction, seeds);

  Table t;
  t.columns = result_columns();
  const Point pt{gamma, kNaN, kNaN, static_cast<std::int64_t>(data.X.cols())};
  auto series = [&](auto&& get) {
    std::vector<std::vector<double>> v;
    for (std::size_t i = 0; i < s.reports.size(); ++i) v.push_back({get(i)});
    return aggregate(v, 0);
  };
  const auto n = static_cast<std::int64_t>(data.X.rows());
  add_row(t, c, pt, n, "debias_factor", kNaN, {s.debias_factor, kNaN});
  add_row(t, c, pt, n, "lam_cv", kNaN, series([&](std::size_t i) { return s.reports[i].lam_cv; }));
  add_row(t, c, pt, n, "lam_debiased", kNaN,
          series([&](std::size_t i) { return s.reports[i].lam_debiased; }));
  if (s.has_test) {
    add_row(t, c, pt, n, "test_error_cv", kNaN,
            series([&](std::size_t i) { return s.test_error_cv[i]; }));
    add_row(t, c, pt, n, "test_error_debiased", kNaN,
            series([&](std::size_t i) { return s.test_error_debiased[i]; }));
    add_row(t, c, pt, n, "test_error_delta", kNaN, series([&](std::size_t i) {
              return s.test_error_debiased[i] - s.test_error_cv[i];
            }));
  }
  return t;
}

Table timing_table(const ExperimentConfig& c) {
  Table all;
  all.columns = timing_columns();
  for (double g : c.gammas) {
    std::vector<SketchSpec> specs;
    for (SketchKind k : c.sketches) {
      if (k == SketchKind::marginal) {
        specs.push_back({k, c.family, 1.0});
        continue;
      }
      for (double r : c.ratios) specs.push_back({k, c.family, r});
    }
    const double lam = c.lams.empty() ? 1.0 : c.lams.front();
    Table t = timing_benchmark(c.n, c.p_for(g), specs, c.repeats, lam, c.seed);
    for (auto& row : t.rows) all.rows.push_back(std::move(row));
  }
  return all;
}

}  // namespace

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {"experiment", "n",      "p",       "gamma",
                                                "lam",        "ratio",  "metric",  "theory",
                                                "mc_mean",    "mc_se",  "replicates", "seed"};
  return cols;
}

const std::vector<std::string>& timing_columns() {
  static const std::vector<std::string> cols = {"estimator", "n", "p", "ratio", "seconds_mean",
                                                "seconds_std"};
  return cols;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult res;
  res.meta = {config.hash(), config.seed, std::string(kToolVersion),
              std::string(to_string(config.kind))};
  if (config.kind == ExperimentKind::timing) {
    res.table = timing_table(config);
    return res;
  }
  if (config.kind == ExperimentKind::cv && !config.data.empty()) {
    res.table = dataset_cv_table(config);
    return res;
  }

  const Plan plan = make_plan(config);
  const std::size_t P = plan.points.size();
  const auto R = static_cast<std::size_t>(config.replicates);
  const int threads = config.effective_threads();

  std::vector<std::vector<double>> theory(P);
  parallel_for(P, threads, [&](std::size_t i) { theory[i] = plan.theory(plan.points[i], i); });

  std::vector<std::vector<double>> draws(P * R);
  parallel_for(P * R, threads, [&](std::size_t job) {
    const std::size_t i = job / R;
    const std::size_t r = job % R;
    const RngStream rng = RngStream(config.seed, i + 1).child(r);
    draws[job] = plan.replicate(plan.points[i], rng);
  });

  res.table.columns = result_columns();
  for (std::size_t i = 0; i < P; ++i) {
    const std::vector<std::vector<double>> reps(draws.begin() + static_cast<std::ptrdiff_t>(i * R),
                                                draws.begin() + static_cast<std::ptrdiff_t>((i + 1) * R));
    for (std::size_t m = 0; m < plan.metrics.size(); ++m) {
      const Moments mc = R == 0 ? Moments{kNaN, kNaN} : aggregate(reps, m);
      add_row(res.table, config, plan.points[i], config.n, plan.metrics[m], theory[i][m], mc);
    }
  }
  return res;
}

namespace {

// Row indices picked by a subsampling sketch (one unit entry per row).
std::vector<Index> selected_rows(const MatrixXd& L) {
  std::vector<Index> idx(static_cast<std::size_t>(L.rows()));
  for (Index i = 0; i < L.rows(); ++i) L.row(i).maxCoeff(&idx[static_cast<std::size_t>(i)]);
  return idx;
}

MatrixXd apply_left(const MatrixXd& L, const MatrixXd& X, SketchFamily family) {
  if (family != SketchFamily::subsample) return L * X;
  const auto idx = selected_rows(L);
  MatrixXd out(static_cast<Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = X.row(idx[i]);
  return out;
}

VectorXd solve_spd(MatrixXd a, const VectorXd& b) {
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw NumericError("timing: SPD solve failed");
  return llt.solve(b);
}

VectorXd fit(const MatrixXd& X, const VectorXd& y, double lam, const SketchSpec* spec,
             RngStream rng) {
  const Index n = X.rows();
  const Index p = X.cols();
  const double dn = static_cast<double>(n);
  if (spec == nullptr) return ridge_solve(X, y, lam);
  switch (spec->kind) {
    case SketchKind::marginal:
      return X.transpose() * y / (dn * lam);
    case SketchKind::primal: {
      const auto m = static_cast<Index>(std::llround(spec->ratio * dn));
      const MatrixXd lx = apply_left(make_sketch(spec->family, m, n, rng), X, spec->family);
      MatrixXd a = lx.transpose() * lx / dn;
      a.diagonal().array() += lam;
      return solve_spd(std::move(a), X.transpose() * y / dn);
    }
    case SketchKind::full: {
      const auto m = static_cast<Index>(std::llround(spec->ratio * dn));
      const MatrixXd L = make_sketch(spec->family, m, n, rng);
      const MatrixXd lx = apply_left(L, X, spec->family);
      const VectorXd ly = apply_left(L, y, spec->family);
      MatrixXd a = lx.transpose() * lx / dn;
      a.diagonal().array() += lam;
      return solve_spd(std::move(a), lx.transpose() * ly / dn);
    }
    case SketchKind::dual: {
      const auto d = static_cast<Index>(std::llround(spec->ratio * static_cast<double>(p)));
      const MatrixXd rt = make_sketch(spec->family, d, p, rng);
      const MatrixXd xr = apply_left(rt, X.transpose(), spec->family).transpose();
      MatrixXd g = xr * xr.transpose() / dn;
      g.diagonal().array() += lam;
      return X.transpose() * solve_spd(std::move(g), y) / dn;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

Table timing_benchmark(std::int64_t n, std::int64_t p, const std::vector<SketchSpec>& specs,
                       int repeats, double lam, std::uint64_t seed) {
  if (repeats < 1) throw ValidationError("timing_benchmark: repeats must be >= 1");
  if (n < 1 || p < 1) throw ValidationError("timing_benchmark: n and p must be positive");
  for (const auto& s : specs) s.validate();
  const RngStream base(seed, 0x74696d65ULL);
  const MatrixXd X = gaussian_design(n, p, base.child(1));
  const VectorXd y = base.child(2).normal_vector(n);

  Table t;
  t.columns = timing_columns();
  auto measure = [&](const SketchSpec* spec, std::size_t which) {
    std::vector<double> secs;
    for (int r = 0; r < repeats; ++r) {
      const RngStream rng = base.child(100 + which).child(static_cast<std::uint64_t>(r));
      const auto t0 = std::chrono::steady_clock::now();
      const VectorXd b = fit(X, y, lam, spec, rng);
      const auto t1 = std::chrono::steady_clock::now();
      if (!b.allFinite()) throw NumericError("timing_benchmark: non-finite coefficients");
      secs.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    double mean = 0.0;
    for (double s : secs) mean += s / repeats;
    double var = 0.0;
    for (double s : secs) var += (s - mean) * (s - mean);
    const double sd = repeats > 1 ? std::sqrt(var / (repeats - 1)) : 0.0;
    std::string label = spec ? std::string(to_string(spec->kind)) + "_" +
                                   std::string(to_string(spec->family))
                             : "ridge";
    if (spec && spec->kind == SketchKind::marginal) label = "marginal";
    t.add_row({label, n, p, spec ? spec->ratio : 1.0, mean, sd});
  };
  measure(nullptr, 0);
  for (std::size_t i = 0; i < specs.size(); ++i) measure(&specs[i], i + 1);
  return t;
}

void write_result(std::ostream& os, const ExperimentResult& result, const std::string& format) {
  if (format == "json") {
    write_json(os, result.table, result.meta);
  } else if (format == "csv") {
    write_csv(os, result.table, result.meta);
  } else {
    throw ValidationError("unknown output format '" + format + "'");
  }
}

}  // namespace ridgesketch::harness
