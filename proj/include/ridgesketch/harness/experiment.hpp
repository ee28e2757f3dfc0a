#pragma once

#include <ostream>
#include <vector>

#include "ridgesketch/estimators.hpp"
#include "ridgesketch/harness/config.hpp"
#include "ridgesketch/harness/table.hpp"

namespace ridgesketch::harness {

struct ExperimentResult {
  Table table;
  TableMeta meta;
};

/// Columns of every simulation table.
const std::vector<std::string>& result_columns();
/// Columns of the timing table.
const std::vector<std::string>& timing_columns();

/// Runs the experiment described by config. Each (point, replicate) pair draws
/// from RngStream(seed, point + 1).child(replicate), so results do not depend
/// on the thread count. replicates = 0 yields theory only and consumes no
/// randomness, except for primal_gaussian whose theory value is itself a
/// finite-matrix average (drawn from a separate stream).
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Wall-clock seconds to compute the coefficient vector of ridge and each
/// sketched variant on one synthetic problem, averaged over `repeats`.
Table timing_benchmark(std::int64_t n, std::int64_t p, const std::vector<SketchSpec>& specs,
                       int repeats, double lam, std::uint64_t seed);

void write_result(std::ostream& os, const ExperimentResult& result, const std::string& format);

}  // namespace ridgesketch::harness
