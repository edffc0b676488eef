#pragma once

#include <optional>
#include <string>

#include "pidkl/cli/config.hpp"

namespace pidkl::cli {

/// A pipeline stage failed; `stage` names it for the exit diagnostics.
struct StageError : std::runtime_error {
  std::string stage;
  StageError(std::string stage_, const std::string& what)
      : std::runtime_error("stage '" + stage_ + "' failed: " + what),
        stage(std::move(stage_)) {}
};

struct RunOptions {
  std::optional<std::string> out_dir_override;
  std::optional<unsigned long long> seed_override;  // offsets per-stage seeds
  bool quiet = false;
};

struct RunResult {
  std::string out_dir;
  std::string manifest_path;
};

/// generate -> pretrain -> hmc -> summarize -> predict, writing
/// observations.csv, pretrain.json, chain.csv, diagnostics.json,
/// summary.json, field.csv and manifest.json under the output directory.
RunResult run_experiment(const ExperimentConfig& config,
                         const RunOptions& options = {});

}  // namespace pidkl::cli
