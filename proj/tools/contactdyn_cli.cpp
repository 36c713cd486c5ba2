// Command-line experiment runner: every pipeline is a subcommand driven by a
// single config file, writing deterministic artifacts for tests and plots.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <functional>
#include <string>

#include "contactdyn/runner.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 1;
  std::string format;
  std::string grid_file;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_grid) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides output.directory)");
  cmd->add_option("--threads", args.threads, "worker threads for per-point integration")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", args.format, "comma-separated subset of csv,json");
  if (with_grid)
    cmd->add_option("--grid", args.grid_file, "reuse a solved grid function (.bin)");
}

int dispatch(const CommonArgs& args,
             const std::function<contactdyn::RunResult(const contactdyn::ExperimentConfig&,
                                                       const contactdyn::RunOptions&)>& body) {
  using namespace contactdyn;
  try {
    ExperimentConfig cfg = load_config(args.config_path);
    if (!args.format.empty()) {
      cfg.output_formats.clear();
      std::string tok;
      std::istringstream ss(args.format);
      while (std::getline(ss, tok, ',')) {
        if (tok != "csv" && tok != "json")
          throw ConfigError("unknown format '" + tok + "'", 0, "--format");
        cfg.output_formats.insert(tok);
      }
    }
    RunOptions opt;
    if (!args.out_dir.empty()) opt.out_dir = args.out_dir;
    opt.threads = args.threads;
    if (!args.grid_file.empty()) opt.grid_file = args.grid_file;

    const RunResult result = body(cfg, opt);
    for (const auto& f : result.failures) std::fprintf(stderr, "check failed: %s\n", f.c_str());
    return result.exit_code;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monotone contact Hamiltonian dynamics toolkit"};
  app.require_subcommand(1);

  CommonArgs check_args, sim_args, hj_args, attr_args, analyze_args;
  auto* check = app.add_subcommand("check", "verify (H1)-(H3) and (M+-) on a sample box");
  add_common(check, check_args, false);
  auto* simulate = app.add_subcommand("simulate", "integrate one orbit with diagnostics");
  add_common(simulate, sim_args, false);
  auto* solve_hj = app.add_subcommand("solve-hj", "solve the stationary HJ equation on a grid");
  add_common(solve_hj, hj_args, false);
  auto* attractor = app.add_subcommand("attractor", "approximate the maximal attractor");
  add_common(attractor, attr_args, true);
  auto* analyze = app.add_subcommand("analyze", "equilibria, connections, Theorem B checks");
  add_common(analyze, analyze_args, true);

  CLI11_PARSE(app, argc, argv);

  using namespace contactdyn;
  if (check->parsed()) return dispatch(check_args, run_check);
  if (simulate->parsed()) return dispatch(sim_args, run_simulate);
  if (solve_hj->parsed()) return dispatch(hj_args, run_solve_hj);
  if (attractor->parsed()) return dispatch(attr_args, run_attractor);
  if (analyze->parsed()) return dispatch(analyze_args, run_analyze);
  return 2;
}
