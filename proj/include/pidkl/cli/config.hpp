#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pidkl/hmc/sampler.hpp"
#include "pidkl/pde/problems.hpp"
#include "pidkl/pretrain/pretrain.hpp"

namespace pidkl::cli {

/// Schema violation; `key` is the dotted path of the offending field.
struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(std::string key_, const std::string& what)
      : std::runtime_error("config error at '" + key_ + "': " + what),
        key(std::move(key_)) {}
};

struct PredictGrid {
  std::string type = "grid";  // "grid" (dx == 1) or "random"
  int points_per_dim = 21;
  int n_random = 200;
  unsigned long long seed = 7;
};

struct ExperimentConfig {
  std::string problem_name;
  pde::ProblemOverrides overrides;

  int n_u = 50;
  int n_f = 40;
  double tau_u_sq = 1e-6;
  double tau_f_sq = 1e-6;
  unsigned long long data_seed = 101;

  pretrain::PretrainConfig pretrain;
  hmc::HmcConfig hmc;
  double log_psi_sd = 0.5;

  PredictGrid grid;
  int bma_thin = 10;

  std::string output_dir = "out";

  /// Fields that were not present in the document and took defaults.
  std::vector<std::string> defaulted;
};

/// Parses and validates a config document. Throws ConfigError naming the
/// offending key on schema violations.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Canonical echo of the parsed config (defaults filled in).
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace pidkl::cli
