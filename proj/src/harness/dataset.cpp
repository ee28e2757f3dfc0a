#include "ridgesketch/harness/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ridgesketch/errors.hpp"

namespace ridgesketch::harness {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_cell(const std::string& s, double& v) {
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(v);
}

void standardize_column(Eigen::Ref<VectorXd> col, double& mean, double& scale,
                        const std::string& name) {
  mean = col.mean();
  col.array() -= mean;
  scale = std::sqrt(col.squaredNorm() / static_cast<double>(col.size()));
  if (!(scale > 0.0)) throw ValidationError("cannot standardize constant column '" + name + "'");
  col /= scale;
}

}  // namespace

Dataset parse_csv(const std::string& text, const std::string& response_column, bool standardize) {
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw ValidationError("dataset: file is empty");
  std::size_t response_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == response_column) response_idx = i;
  }
  if (response_idx == header.size()) {
    throw ValidationError("dataset: response column '" + response_column + "' not in header");
  }
  if (header.size() < 2) throw ValidationError("dataset: need at least one feature column");

  std::vector<std::vector<double>> rows;
  std::vector<std::string> bad;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++data_row;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << "dataset: row " << data_row << " (line " << line_no << ") has " << cells.size()
         << " cells, header has " << header.size();
      throw ValidationError(os.str());
    }
    std::vector<double> values(cells.size());
    bool ok = true;
    for (std::size_t i = 0; i < cells.size(); ++i) ok = parse_cell(cells[i], values[i]) && ok;
    if (!ok) {
      bad.push_back("row " + std::to_string(data_row) + " (line " + std::to_string(line_no) + ")");
      continue;
    }
    rows.push_back(std::move(values));
  }
  if (!bad.empty()) {
    std::string msg = "dataset: non-numeric or missing cells in ";
    for (std::size_t i = 0; i < bad.size(); ++i) msg += (i ? ", " : "") + bad[i];
    throw ValidationError(msg);
  }
  if (rows.empty()) throw ValidationError("dataset: no data rows");

  Dataset d;
  d.response_name = response_column;
  const auto n = static_cast<Index>(rows.size());
  const auto p = static_cast<Index>(header.size() - 1);
  d.X.resize(n, p);
  d.y.resize(n);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i != response_idx) d.feature_names.push_back(header[i]);
  }
  for (Index r = 0; r < n; ++r) {
    Index c = 0;
    for (std::size_t i = 0; i < header.size(); ++i) {
      const double v = rows[static_cast<std::size_t>(r)][i];
      if (i == response_idx) {
        d.y[r] = v;
      } else {
        d.X(r, c++) = v;
      }
    }
  }
  d.feature_mean = VectorXd::Zero(p);
  d.feature_scale = VectorXd::Ones(p);
  if (standardize) {
    if (n < 2) throw ValidationError("dataset: standardization needs at least 2 rows");
    for (Index j = 0; j < p; ++j) {
      standardize_column(d.X.col(j), d.feature_mean[j], d.feature_scale[j],
                         d.feature_names[static_cast<std::size_t>(j)]);
    }
    standardize_column(d.y, d.response_mean, d.response_scale, response_column);
    d.standardized = true;
  }
  return d;
}

Dataset ingest_csv(const std::string& path, const std::string& response_column, bool standardize) {
  std::ifstream in(path);
  if (!in) throw ValidationError("dataset: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), response_column, standardize);
}

CvDatasetSummary cv_on_dataset(const Dataset& data, int K, const std::vector<double>& lam_grid,
                               double test_fraction, const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ValidationError("cv_on_dataset: no seeds");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ValidationError("cv_on_dataset: test_fraction must lie in [0, 1)");
  }
  const Index n = data.X.rows();
  const auto n_test = static_cast<Index>(std::llround(test_fraction * static_cast<double>(n)));
  if (test_fraction > 0.0 && (n_test < 1 || n_test >= n)) {
    throw ValidationError("cv_on_dataset: test_fraction leaves an empty split");
  }

  CvDatasetSummary s;
  s.has_test = test_fraction > 0.0;
  for (std::uint64_t seed : seeds) {
    RngStream rng(seed, 0x6376);
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    if (s.has_test) {
      RngStream split = rng.child(1);
      for (Index i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<Index> pick(0, i);
        std::swap(perm[static_cast<std::size_t>(i)],
                  perm[static_cast<std::size_t>(pick(split.engine()))]);
      }
    }
    const Index n_train = n - (s.has_test ? n_test : 0);
    MatrixXd xt(n_train, data.X.cols());
    VectorXd yt(n_train);
    for (Index i = 0; i < n_train; ++i) {
      xt.row(i) = data.X.row(perm[static_cast<std::size_t>(i)]);
      yt[i] = data.y[perm[static_cast<std::size_t>(i)]];
    }
    CvReport rep = kfold_cv(xt, yt, lam_grid, K, rng.child(2));
    if (s.has_test) {
      MatrixXd xs(n_test, data.X.cols());
      VectorXd ys(n_test);
      for (Index i = 0; i < n_test; ++i) {
        xs.row(i) = data.X.row(perm[static_cast<std::size_t>(n_train + i)]);
        ys[i] = data.y[perm[static_cast<std::size_t>(n_train + i)]];
      }
      const RidgePath path(xt, yt);
      auto err = [&](double lam) {
        return (ys - xs * path.coefficients(lam)).squaredNorm() / static_cast<double>(n_test);
      };
      s.test_error_cv.push_back(err(rep.lam_cv));
      s.test_error_debiased.push_back(err(rep.lam_debiased));
    }
    s.debias_factor = rep.debias_factor;
    s.reports.push_back(std::move(rep));
  }

  const double count = static_cast<double>(seeds.size());
  for (const auto& r : s.reports) {
    s.mean_lam_cv += r.lam_cv / count;
    s.mean_lam_debiased += r.lam_debiased / count;
  }
  if (s.has_test) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      s.mean_test_error_cv += s.test_error_cv[i] / count;
      s.mean_test_error_debiased += s.test_error_debiased[i] / count;
    }
    s.mean_test_error_delta = s.mean_test_error_debiased - s.mean_test_error_cv;
  }
  return s;
}

}  // namespace ridgesketch::harness
