#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "contactdyn/config.hpp"

namespace contactdyn {

struct RunOptions {
  std::filesystem::path out_dir;  // overrides output.directory when non-empty
  int threads = 1;
  std::optional<std::filesystem::path> grid_file;  // reuse a solved grid function
};

struct RunResult {
  int exit_code = 0;  // 0 iff every enabled check passed
  std::vector<std::string> failures;
  std::filesystem::path artifact_dir;
};

/// Subcommand bodies. Each writes its artifacts plus run_manifest.json into
/// the output directory and reports failed checks through the result.
RunResult run_check(const ExperimentConfig& cfg, const RunOptions& opt);
RunResult run_simulate(const ExperimentConfig& cfg, const RunOptions& opt);
RunResult run_solve_hj(const ExperimentConfig& cfg, const RunOptions& opt);
RunResult run_attractor(const ExperimentConfig& cfg, const RunOptions& opt);
RunResult run_analyze(const ExperimentConfig& cfg, const RunOptions& opt);

/// FNV-1a 64 of the verbatim config text, hex-encoded.
std::string config_hash(const std::string& text);

}  // namespace contactdyn
