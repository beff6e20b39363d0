#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mvbismut_cli/config.hpp"

namespace mvb::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitPass = 0,
  kExitFail = 1,
  kExitConfig = 2,
  kExitDiverged = 3,
  kExitError = 4,
};

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool dump_trajectories = false;
  bool quiet = false;
};

struct RunOutcome {
  nlohmann::json report;
  bool pass = false;
  int exit_code = kExitPass;
};

/// Applies the command-line overrides to a parsed configuration.
ExperimentConfig apply_overrides(ExperimentConfig config, const RunOptions& options);

/// Executes the configured task and writes report.json, results.csv, the
/// *.dat curves and plot.gp into the output directory. Numerical failures
/// are reported through the outcome; configuration errors propagate.
RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options);

std::string tool_version();

}  // namespace mvb::cli
