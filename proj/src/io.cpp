#include "contactdyn/io.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace contactdyn::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  const int n = traj.points.empty() ? 1 : traj.points.front().dim();
  os << "t";
  for (int a = 0; a < n; ++a) os << ",x" << a;
  for (int a = 0; a < n; ++a) os << ",p" << a;
  os << ",u,H";
  const bool has_f = traj.f_values.size() == traj.size();
  if (has_f) os << ",F";
  os << "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_double(traj.times[k]);
    const auto& z = traj.points[k];
    for (int a = 0; a < n; ++a) os << "," << format_double(z.x.coords[a]);
    for (int a = 0; a < n; ++a) os << "," << format_double(z.p[a]);
    os << "," << format_double(z.u) << "," << format_double(traj.h_values[k]);
    if (has_f) os << "," << format_double(traj.f_values[k]);
    os << "\n";
  }
  return os.str();
}

namespace {

ordered_json phase_point_json(const PhasePoint& z) {
  ordered_json j;
  j["x"] = std::vector<double>(z.x.coords.begin(), z.x.coords.end());
  j["p"] = std::vector<double>(z.p.begin(), z.p.end());
  j["u"] = z.u;
  return j;
}

}  // namespace

ordered_json trajectory_json(const Trajectory& traj) {
  ordered_json j;
  j["steps"] = traj.size();
  j["t_begin"] = traj.times.front();
  j["t_end"] = traj.times.back();
  j["termination"] = to_string(traj.termination);
  if (traj.termination_witness) j["witness"] = phase_point_json(*traj.termination_witness);
  j["h_begin"] = traj.h_values.front();
  j["h_end"] = traj.h_values.back();
  return j;
}

std::string cloud_csv(const AttractorApprox& cloud, const HamiltonianModel& model) {
  std::ostringstream os;
  const int n = model.dim();
  for (int a = 0; a < n; ++a) os << "x" << a << ",";
  for (int a = 0; a < n; ++a) os << "p" << a << ",";
  os << "u,H,F\n";
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& z = cloud.points[i];
    for (int a = 0; a < n; ++a) os << format_double(z.x.coords[a]) << ",";
    for (int a = 0; a < n; ++a) os << format_double(z.p[a]) << ",";
    os << format_double(z.u) << "," << format_double(cloud.h_diag[i]) << ","
       << format_double(cloud.f_diag[i]) << "\n";
  }
  return os.str();
}

ordered_json cloud_json(const AttractorApprox& cloud, double u_lower, double u_upper) {
  ordered_json j;
  j["delta"] = cloud.delta;
  j["t_horizon"] = cloud.t_horizon;
  j["n_samples"] = cloud.n_samples;
  j["seed"] = cloud.seed;
  j["u_lower"] = u_lower;
  j["u_upper"] = u_upper;
  double h_max = 0.0, f_max = -std::numeric_limits<double>::infinity();
  for (double h : cloud.h_diag) h_max = std::max(h_max, std::abs(h));
  for (double f : cloud.f_diag) f_max = std::max(f_max, f);
  j["max_abs_h"] = h_max;
  j["max_f"] = cloud.f_diag.empty() ? 0.0 : f_max;
  return j;
}

ordered_json hausdorff_json(const HausdorffReport& report) {
  ordered_json j;
  j["directed_ab"] = report.d_ab;
  j["directed_ba"] = report.d_ba;
  j["distance"] = report.distance();
  return j;
}

namespace {

ordered_json verdict_json(const Verdict& v) {
  ordered_json j;
  switch (v.status) {
    case VerdictStatus::VerifiedOnSample: j["status"] = "verified-on-sample"; break;
    case VerdictStatus::Violated: j["status"] = "violated"; break;
    case VerdictStatus::NotApplicable: j["status"] = "not-applicable"; break;
  }
  if (v.witness) {
    j["witness"] = phase_point_json(*v.witness);
    j["offending_value"] = v.offending_value;
  }
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

}  // namespace

ordered_json assumption_report_json(const AssumptionReport& report) {
  ordered_json j;
  j["H1"] = verdict_json(report.h1);
  j["H2"] = verdict_json(report.h2);
  j["H3"] = verdict_json(report.h3);
  j["H4"] = verdict_json(report.h4);
  j["monotone"] = verdict_json(report.monotone);
  j["sample_box"] = {{"p_radius", report.box.p_radius},
                     {"u_min", report.box.u_min},
                     {"u_max", report.box.u_max},
                     {"points_per_axis", report.box.points_per_axis}};
  ordered_json table = ordered_json::array();
  for (const auto& e : report.coercivity)
    table.push_back({{"e", e.e}, {"u_bound", e.u_bound}, {"radius", e.radius}});
  j["coercivity_radii"] = table;
  j["all_verified"] = report.all_verified();
  return j;
}

ordered_json graph_json(const ConnectionGraph& graph) {
  ordered_json j;
  j["theorem_b_applicable"] = graph.theorem_b_applicable;
  ordered_json nodes = ordered_json::array();
  for (const auto& nd : graph.nodes) {
    ordered_json n;
    n["x"] = std::vector<double>(nd.x0.coords.begin(), nd.x0.coords.end());
    n["u"] = nd.u0;
    n["morse_index"] = nd.morse_index;
    n["degenerate"] = nd.degenerate;
    ordered_json spec = ordered_json::array();
    for (const auto& ev : nd.spectrum) spec.push_back({{"re", ev.real()}, {"im", ev.imag()}});
    n["spectrum"] = spec;
    nodes.push_back(std::move(n));
  }
  j["nodes"] = nodes;
  ordered_json edges = ordered_json::array();
  for (const auto& e : graph.edges) {
    ordered_json ej;
    ej["source"] = e.source;
    ej["target"] = e.target;
    ej["u_min"] = e.u_min;
    ej["u_max"] = e.u_max;
    ej["representatives"] = e.representatives.size();
    edges.push_back(std::move(ej));
  }
  j["edges"] = edges;
  if (!graph.log.empty()) j["log"] = graph.log;
  return j;
}

std::string graph_edge_list(const ConnectionGraph& graph) {
  std::ostringstream os;
  for (const auto& e : graph.edges) os << e.source << " " << e.target << "\n";
  return os.str();
}

ordered_json theorem_b_json(const TheoremBVerdict& v) {
  ordered_json j;
  j["applicable"] = v.applicable;
  j["containment_ok"] = v.containment_ok;
  j["max_cloud_distance"] = v.max_cloud_distance;
  j["ordering_ok"] = v.ordering_ok;
  j["connectivity_ok"] = v.connectivity_ok;
  j["cluster_count"] = v.cluster_count;
  j["ok"] = v.ok();
  return j;
}

void save_grid_function(const fs::path& path, const GridFunction& gf) {
  ordered_json header;
  header["dim"] = gf.grid.dim;
  header["n"] = gf.grid.n_per_axis;
  header["kind"] = gf.kind == SolutionKind::UMinus ? "u_minus" : "u_plus";
  header["lipschitz_bound"] = gf.lipschitz_bound;
  header["residual_norm"] = gf.residual_norm;

  std::string blob = header.dump();
  blob.push_back('\n');
  static_assert(sizeof(double) == 8);
  static_assert(std::endian::native == std::endian::little,
                "grid payload is little-endian float64");
  const std::size_t payload = static_cast<std::size_t>(gf.values.size()) * 8;
  const std::size_t head = blob.size();
  blob.resize(head + payload);
  std::memcpy(blob.data() + head, gf.values.data(), payload);
  write_file_atomic(path, blob);
}

GridFunction load_grid_function(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string header_line;
  std::getline(in, header_line);
  const auto header = ordered_json::parse(header_line);

  GridFunction gf;
  gf.grid = Grid(header.at("dim").get<int>(), header.at("n").get<int>());
  gf.kind = header.at("kind").get<std::string>() == "u_plus" ? SolutionKind::UPlus
                                                             : SolutionKind::UMinus;
  gf.lipschitz_bound = header.at("lipschitz_bound").get<double>();
  gf.residual_norm = header.at("residual_norm").get<double>();
  gf.values.resize(gf.grid.node_count());
  in.read(reinterpret_cast<char*>(gf.values.data()),
          static_cast<std::streamsize>(gf.values.size() * 8));
  if (in.gcount() != static_cast<std::streamsize>(gf.values.size() * 8))
    throw std::runtime_error("truncated grid function payload in " + path.string());
  return gf;
}

std::string grid_function_csv(const GridFunction& gf) {
  std::ostringstream os;
  for (int a = 0; a < gf.grid.dim; ++a) os << "x" << a << ",";
  os << "u\n";
  const std::int64_t m = gf.grid.node_count();
  for (std::int64_t i = 0; i < m; ++i) {
    const VecN x = gf.grid.node(i);
    for (int a = 0; a < gf.grid.dim; ++a) os << format_double(x[a]) << ",";
    os << format_double(gf.values[i]) << "\n";
  }
  return os.str();
}

}  // namespace contactdyn::io
