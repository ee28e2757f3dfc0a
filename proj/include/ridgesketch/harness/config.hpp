#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ridgesketch/estimators.hpp"

namespace ridgesketch::harness {

inline constexpr std::string_view kToolVersion = "0.3.1";

enum class ExperimentKind {
  ridge_risk,
  bias_variance,
  representation,
  primal_orth,
  dual_orth,
  full,
  marginal,
  dual_gaussian,
  primal_gaussian,
  cv,
  loo,
  timing,
};

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);
bool is_sketch_kind(ExperimentKind kind);

/// Everything an experiment needs. Serialized as flat `key = value` lines;
/// lists are comma separated. Precedence when assembling: defaults, then the
/// config file, then command-line overrides.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::ridge_risk;
  std::int64_t n = 500;
  std::vector<double> gammas{0.5};
  std::vector<double> lams;        // empty: gamma sigma^2 / alpha^2 per gamma
  std::vector<double> ratios{0.5};  // m/n (primal, full) or d/p (dual)
  double alpha = 1.0;              // signal scale, alpha^2 = E||beta||^2
  double sigma = 1.0;              // noise standard deviation
  SketchFamily family = SketchFamily::haar;
  std::vector<SketchKind> sketches{SketchKind::primal, SketchKind::dual};  // timing only
  int replicates = 20;
  std::uint64_t seed = 1;
  int threads = 0;                 // 0: all available cores
  std::string out;                 // empty: stdout
  std::string format = "csv";
  int folds = 5;
  std::vector<double> lam_grid;    // empty: default grid
  int grid_points = 40;
  double test_fraction = 0.2;
  std::string data;                // CSV dataset for cv
  std::string response;
  bool standardize = true;
  int proxy_n = 200;
  int proxy_reps = 20;
  int probes = 10;
  int repeats = 3;
  double cov_rho = 0.0;            // AR(1) covariance rho^|i-j|; 0 is the identity

  void validate() const;
  int effective_threads() const;
  std::int64_t p_for(double gamma) const;

  /// Canonical text, one `key = value` line per field in a fixed order.
  std::string to_text() const;
  /// Applies one key/value pair; unknown keys and malformed values throw.
  void set(std::string_view key, std::string_view value);
  /// Applies `key = value` lines; blank lines and `#` comments are skipped.
  void apply_text(std::string_view text);
  void apply_file(const std::string& path);
  static ExperimentConfig from_text(std::string_view text);

  /// FNV-1a hash of the canonical text without the output-only keys
  /// (out, format, threads), as 16 hex digits.
  std::string hash() const;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace ridgesketch::harness
