// Batch front end: theory tables, Monte Carlo runs, CV, LOO and timing.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "ridgesketch/errors.hpp"
#include "ridgesketch/harness/config.hpp"
#include "ridgesketch/harness/experiment.hpp"

using namespace ridgesketch;
using namespace ridgesketch::harness;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> threads;
  std::vector<std::string> sets;
  std::string data;
  std::string response;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output path (default stdout)");
  cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  cmd->add_option("--set", o.sets, "override a config key, e.g. --set gamma=0.2,2");
}

// Precedence: defaults < config file < --set < dedicated flags.
ExperimentConfig assemble(const CommonOptions& o) {
  ExperimentConfig c;
  if (!o.config_path.empty()) c.apply_file(o.config_path);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.format) c.format = *o.format;
  if (o.threads) c.threads = *o.threads;
  if (!o.data.empty()) c.data = o.data;
  if (!o.response.empty()) c.response = o.response;
  return c;
}

void emit(const ExperimentConfig& c) {
  const ExperimentResult r = run_experiment(c);
  if (c.out.empty()) {
    write_result(std::cout, r, c.format);
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw ValidationError("cannot open output file '" + c.out + "'");
  write_result(f, r, c.format);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ridge regression and sketching: theory, simulation and cross-validation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  CommonOptions theory_o, sim_o, cv_o, loo_o, bench_o, timing_o;
  auto* theory = app.add_subcommand("theory", "theory-only table (no replicates)");
  auto* simulate = app.add_subcommand("simulate", "theory vs Monte Carlo for the configured kind");
  auto* cv = app.add_subcommand("cv", "K-fold CV with the (K-1)/K correction");
  auto* loo = app.add_subcommand("loo", "leave-one-out shortcut");
  auto* bench = app.add_subcommand("sketch-bench", "sketched estimators vs their theory");
  auto* timing = app.add_subcommand("timing", "wall-clock of ridge and sketched fits");
  add_common(theory, theory_o);
  add_common(simulate, sim_o);
  add_common(cv, cv_o);
  add_common(loo, loo_o);
  add_common(bench, bench_o);
  add_common(timing, timing_o);
  cv->add_option("--data", cv_o.data, "CSV dataset (header row, numeric cells)");
  cv->add_option("--response", cv_o.response, "response column of --data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*theory) {
      ExperimentConfig c = assemble(theory_o);
      if (c.kind == ExperimentKind::timing) throw ValidationError("timing has no theory table");
      c.replicates = 0;
      emit(c);
    } else if (*simulate) {
      emit(assemble(sim_o));
    } else if (*cv) {
      ExperimentConfig c = assemble(cv_o);
      c.kind = ExperimentKind::cv;
      emit(c);
    } else if (*loo) {
      ExperimentConfig c = assemble(loo_o);
      c.kind = ExperimentKind::loo;
      emit(c);
    } else if (*bench) {
      ExperimentConfig c = assemble(bench_o);
      if (!is_sketch_kind(c.kind)) c.kind = ExperimentKind::primal_orth;
      emit(c);
    } else if (*timing) {
      ExperimentConfig c = assemble(timing_o);
      c.kind = ExperimentKind::timing;
      emit(c);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error[validation]: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "error[numeric]: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
