#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "contactdyn/flow.hpp"
#include "contactdyn/model.hpp"

namespace contactdyn {

/// Parse failure with the offending line and field.
struct ConfigError : std::runtime_error {
  int line = 0;
  std::string key;
  ConfigError(std::string msg, int line_, std::string key_)
      : std::runtime_error(std::move(msg)), line(line_), key(std::move(key_)) {}
};

/// One experiment: sections model / grid / flow / attractor / structure /
/// output of a flat `key = value` file with dotted section prefixes.
/// Unknown keys are rejected; numeric fields are validated on parse.
struct ExperimentConfig {
  int schema_version = 1;

  HamiltonianModel::Params model;

  int grid_n = 256;

  IntegratorConfig flow;
  VecN flow_x0;  // initial condition for simulate
  VecN flow_p0;
  double flow_u0 = 0.0;
  bool flow_initial_set = false;

  double attractor_delta = 0.5;
  double attractor_t = -1.0;  // < 0: default 20 / lambda
  std::int64_t attractor_n_samples = 1000;
  std::optional<std::uint64_t> attractor_seed;

  double structure_eps = 1e-5;
  double structure_tol = 1e-2;
  int structure_seed_density = 16;

  std::string output_directory = "out";
  std::set<std::string> output_formats = {"csv", "json"};

  std::string source_text;  // verbatim config, for the run manifest hash

  HamiltonianModel make_model() const { return HamiltonianModel(model); }
  double attractor_horizon() const {
    return attractor_t > 0.0 ? attractor_t : 20.0 / model.lambda;
  }
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Potential mini-grammar: sum of `coef*cos(k)` / `coef*sin(k)` terms and
/// bare constants, e.g. "cos(1)", "0.3*cos(1) + 0.1*sin(2) - 0.25",
/// and for n = 2 "cos(1,0) + cos(0,1)".
Potential parse_potential(const std::string& text, int dim);

}  // namespace contactdyn
