#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "csv.hpp"

namespace smcf::cli {

// Companion file emitted next to the main CSV (plot columns, histograms).
struct AuxFile {
  std::string name;
  std::string content;
};

// Everything a subcommand produces: CSV rows in deterministic grid order, a
// human-readable report for stdout, companion files, and the check status
// (ok == false maps to exit code 2).
struct CommandResult {
  std::vector<ResultRecord> rows;
  std::string report;
  std::vector<AuxFile> aux;
  bool ok = true;
};

struct VerifyOptions {
  // Test hook: scales the analytic right-hand sides of the bound checks, so
  // a tampered constant (scale < 1) must flip the command to failure.
  double bound_scale = 1.0;
};

CommandResult cmd_forgetting(const ExperimentConfig& cfg, int threads);
CommandResult cmd_poc(const ExperimentConfig& cfg, int threads);
CommandResult cmd_lp_error(const ExperimentConfig& cfg, int threads);
CommandResult cmd_coupling_time(const ExperimentConfig& cfg, int threads);
CommandResult cmd_verify_bounds(const ExperimentConfig& cfg, int threads,
                                const VerifyOptions& opts = {});
CommandResult cmd_oos_demo(const ExperimentConfig& cfg, int threads);

}  // namespace smcf::cli
