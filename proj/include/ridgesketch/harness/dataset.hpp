#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ridgesketch/core_types.hpp"
#include "ridgesketch/cross_validation.hpp"

namespace ridgesketch::harness {

struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> feature_names;
  std::string response_name;
  bool standardized = false;
  // Per-column mean and scale used for standardization (0 and 1 otherwise).
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  double response_mean = 0.0;
  double response_scale = 1.0;
};

/// Reads a numeric CSV with a header row. Every cell must parse as a finite
/// number; offending rows are listed (1-based data row and file line) in the
/// error. With standardize set, features and response are z-scored using the
/// population standard deviation.
Dataset ingest_csv(const std::string& path, const std::string& response_column, bool standardize);
Dataset parse_csv(const std::string& text, const std::string& response_column, bool standardize);

struct CvDatasetSummary {
  std::vector<CvReport> reports;        // one per seed
  std::vector<double> test_error_cv;    // held-out MSE at lam_cv, empty when test_fraction = 0
  std::vector<double> test_error_debiased;
  double debias_factor = 0.0;
  double mean_lam_cv = 0.0;
  double mean_lam_debiased = 0.0;
  double mean_test_error_cv = 0.0;
  double mean_test_error_debiased = 0.0;
  double mean_test_error_delta = 0.0;   // debiased minus raw, negative favors the correction
  bool has_test = false;
};

/// For each seed: hold out test_fraction of rows, run K-fold CV on the rest,
/// refit on all training rows at lam_cv and lam_debiased and score on the
/// held-out rows.
CvDatasetSummary cv_on_dataset(const Dataset& data, int K, const std::vector<double>& lam_grid,
                               double test_fraction, const std::vector<std::uint64_t>& seeds);

}  // namespace ridgesketch::harness
