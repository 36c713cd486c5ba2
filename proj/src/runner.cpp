#include "contactdyn/runner.hpp"

#include <chrono>
#include <sstream>

#include "contactdyn/io.hpp"

namespace contactdyn {

namespace fs = std::filesystem;
using io::ordered_json;

std::string config_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

namespace {

struct RunScope {
  ExperimentConfig cfg;
  RunOptions opt;
  fs::path dir;
  RunResult result;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  RunScope(const ExperimentConfig& cfg_, const RunOptions& opt_, const char* /*command*/)
      : cfg(cfg_), opt(opt_) {
    dir = opt.out_dir.empty() ? fs::path(cfg.output_directory) : opt.out_dir;
    fs::create_directories(dir);
    result.artifact_dir = dir;
  }

  bool wants(const char* fmt) const { return cfg.output_formats.count(fmt) > 0; }

  void fail(const std::string& what) {
    result.failures.push_back(what);
    result.exit_code = 1;
  }

  void finish(const char* command, std::uint64_t seed) {
    ordered_json manifest;
    manifest["command"] = command;
    manifest["version"] = kVersion;
    manifest["config_hash"] = config_hash(cfg.source_text);
    manifest["seed"] = seed;
    manifest["failures"] = result.failures;
    manifest["exit_code"] = result.exit_code;
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
    manifest["wall_time_seconds"] = elapsed.count();
    io::write_file_atomic(dir / "run_manifest.json", manifest.dump(2) + "\n");
  }
};

GridFunction obtain_grid_function(const ExperimentConfig& cfg, const RunOptions& opt,
                                  const HamiltonianModel& model) {
  if (opt.grid_file) return io::load_grid_function(*opt.grid_file);
  return solve_hj(model, Grid(model.dim(), cfg.grid_n));
}

std::uint64_t required_seed(const ExperimentConfig& cfg) {
  if (!cfg.attractor_seed)
    throw ConfigError("attractor.seed is required for runs that sample", 0, "attractor.seed");
  return *cfg.attractor_seed;
}

}  // namespace

RunResult run_check(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunScope scope(cfg, opt, "check");
  const HamiltonianModel model = cfg.make_model();
  const AssumptionReport report = check_assumptions(model, SampleBox{});
  io::write_file_atomic(scope.dir / "assumptions.json",
                        io::assumption_report_json(report).dump(2) + "\n");
  if (!report.all_verified()) scope.fail("assumption check failed on sample");
  scope.finish("check", 0);
  return scope.result;
}

RunResult run_simulate(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunScope scope(cfg, opt, "simulate");
  const HamiltonianModel model = cfg.make_model();
  if (!cfg.flow_initial_set)
    throw ConfigError("simulate requires flow.x0 and flow.p0 (and flow.u0)", 0, "flow.x0");
  const PhasePoint z0(TorusPoint(cfg.flow_x0), cfg.flow_p0, cfg.flow_u0);
  const Trajectory traj = integrate(model, z0, cfg.flow);

  if (scope.wants("csv"))
    io::write_file_atomic(scope.dir / "trajectory.csv", io::trajectory_csv(traj));
  if (scope.wants("json")) {
    ordered_json j = io::trajectory_json(traj);
    j["energy_residual"] = energy_residual(model, traj);
    j["h_sign_constant"] = h_sign_constant(traj);
    io::write_file_atomic(scope.dir / "trajectory.json", j.dump(2) + "\n");
  }

  const bool monotone_matches_direction =
      (model.sign() == MonotoneSign::Minus) == (cfg.flow.direction == Direction::Forward);
  if (monotone_matches_direction) {
    const auto verdict = check_first_lyapunov(model, traj);
    if (!verdict.ok) scope.fail("first Lyapunov bound violated");
  }
  if (!h_sign_constant(traj)) scope.fail("H changed sign along the orbit");
  if (traj.termination == Termination::StepUnderflow) scope.fail("step underflow");
  scope.finish("simulate", 0);
  return scope.result;
}

RunResult run_solve_hj(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunScope scope(cfg, opt, "solve-hj");
  const HamiltonianModel model = cfg.make_model();
  const Grid grid(model.dim(), cfg.grid_n);
  const GridFunction gf = solve_hj(model, grid);

  io::save_grid_function(scope.dir / "ufield.bin", gf);
  if (scope.wants("csv"))
    io::write_file_atomic(scope.dir / "ufield.csv", io::grid_function_csv(gf));
  if (scope.wants("json")) {
    const auto [lo, hi] = constant_bounds(model, grid);
    ordered_json j;
    j["kind"] = gf.kind == SolutionKind::UMinus ? "u_minus" : "u_plus";
    j["n"] = grid.n_per_axis;
    j["dim"] = grid.dim;
    j["lipschitz_bound"] = gf.lipschitz_bound;
    j["residual_norm"] = gf.residual_norm;
    j["u_lower"] = lo;
    j["u_upper"] = hi;
    j["min_value"] = gf.values.minCoeff();
    j["max_value"] = gf.values.maxCoeff();
    io::write_file_atomic(scope.dir / "ufield.json", j.dump(2) + "\n");

    if (!(gf.values.minCoeff() >= lo - 1e-6 && gf.values.maxCoeff() <= hi + 1e-6))
      scope.fail("comparison-principle sandwich violated");
  }
  scope.finish("solve-hj", 0);
  return scope.result;
}

RunResult run_attractor(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunScope scope(cfg, opt, "attractor");
  const HamiltonianModel model = cfg.make_model();
  const std::uint64_t seed = required_seed(cfg);
  const GridFunction gf = obtain_grid_function(cfg, opt, model);
  const TrappingSpec spec = make_trapping_spec(model, gf, cfg.attractor_delta);

  IntegratorConfig icfg = cfg.flow;
  const AttractorApprox cloud = approximate_attractor(
      model, spec, cfg.attractor_horizon(), cfg.attractor_n_samples, seed, icfg, opt.threads);

  if (scope.wants("csv"))
    io::write_file_atomic(scope.dir / "cloud.csv", io::cloud_csv(cloud, model));
  if (scope.wants("json")) {
    ordered_json j = io::cloud_json(cloud, spec.uref.values.minCoeff(), spec.uref.values.maxCoeff());
    const auto graph_verdict = graph_property_check(cloud);
    j["graph_property_injective"] = graph_verdict.injective;
    j["cluster_count"] = single_linkage_cluster_count(cloud.points);
    io::write_file_atomic(scope.dir / "cloud.json", j.dump(2) + "\n");
    if (!graph_verdict.injective) scope.fail("graph property violated on the cloud");
  }
  scope.finish("attractor", seed);
  return scope.result;
}

RunResult run_analyze(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunScope scope(cfg, opt, "analyze");
  const HamiltonianModel model = cfg.make_model();

  const EquilibriumSet equilibria = find_equilibria(model, cfg.structure_seed_density);
  const ConnectionGraph graph = detect_connections(model, equilibria, cfg.structure_eps);

  ordered_json gj = io::graph_json(graph);
  if (scope.wants("csv")) {
    // orbit polylines referenced from the graph artifact
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
      ordered_json files = ordered_json::array();
      for (std::size_t r = 0; r < graph.edges[e].representatives.size(); ++r) {
        std::ostringstream name;
        name << "edge_" << graph.edges[e].source << "_" << graph.edges[e].target << "_rep" << r
             << ".csv";
        io::write_file_atomic(scope.dir / name.str(),
                              io::trajectory_csv(graph.edges[e].representatives[r]));
        files.push_back(name.str());
      }
      gj["edges"][e]["polylines"] = files;
    }
  }
  io::write_file_atomic(scope.dir / "graph.json", gj.dump(2) + "\n");
  io::write_file_atomic(scope.dir / "edges.txt", io::graph_edge_list(graph));

  if (graph.theorem_b_applicable && cfg.attractor_seed) {
    const GridFunction gf = obtain_grid_function(cfg, opt, model);
    const TrappingSpec spec = make_trapping_spec(model, gf, cfg.attractor_delta);
    const AttractorApprox cloud =
        approximate_attractor(model, spec, cfg.attractor_horizon(), cfg.attractor_n_samples,
                              *cfg.attractor_seed, cfg.flow, opt.threads);
    const TheoremBVerdict verdict = verify_theorem_b(graph, cloud, cfg.structure_tol);
    io::write_file_atomic(scope.dir / "theorem_b.json", io::theorem_b_json(verdict).dump(2) + "\n");
    if (!verdict.ok()) scope.fail("theorem B verification failed");
  }
  if (equilibria.anomalous_empty) scope.fail("no equilibria found despite (H2)+(H3)");
  scope.finish("analyze", cfg.attractor_seed.value_or(0));
  return scope.result;
}

}  // namespace contactdyn
