#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smcf/coupling.hpp"
#include "toml_lite.hpp"

namespace smcf::cli {

struct ModelConfig {
  double epsilon = 0.0;  // required
  double g0 = 1.0;
  double g1 = 1.0;
  std::array<double, 2> initial{0.5, 0.5};
  int horizon = 0;  // 0 means: derive from the grids
};

struct GridConfig {
  std::vector<int> n_list;  // key "N"
  std::vector<int> k_list;  // key "k": step counts / time grid
  std::vector<int> q_list;  // key "q": empty means powers of two up to N
  int p_norm = 2;           // key "p": only 2 is supported
  std::vector<CouplingScheme> schemes{CouplingScheme::state};
};

struct RunConfig {
  int replicates = 100;
  std::uint64_t master_seed = 1;
  int threads = 0;  // 0 means: env var / hardware
  int max_steps = 10000;
};

struct OutputConfig {
  std::string directory = ".";
  std::string csv_name;  // empty means "<subcommand>.csv"
};

struct ScenarioConfig {
  bool present = false;
  double g0_delayed = 1.0;
  double g1_delayed = 1.0;
  std::vector<int> delays;
};

struct ExperimentConfig {
  ModelConfig model;
  GridConfig grid;
  RunConfig run;
  OutputConfig output;
  ScenarioConfig scenario;
};

// Parses and validates a config. Unknown sections or keys, type mismatches
// and out-of-domain values all throw ConfigError.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Default propagation-of-chaos marginal sizes: powers of two up to n.
std::vector<int> default_q_grid(int n);

}  // namespace smcf::cli
