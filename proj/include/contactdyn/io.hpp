#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>  // vendored nlohmann/json

#include "contactdyn/assumptions.hpp"
#include "contactdyn/attractor.hpp"
#include "contactdyn/flow.hpp"
#include "contactdyn/structure.hpp"

namespace contactdyn::io {

using ordered_json = nlohmann::ordered_json;

/// Writes text or bytes atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string trajectory_csv(const Trajectory& traj);
ordered_json trajectory_json(const Trajectory& traj);

std::string cloud_csv(const AttractorApprox& cloud, const HamiltonianModel& model);
ordered_json cloud_json(const AttractorApprox& cloud, double u_lower, double u_upper);

ordered_json hausdorff_json(const HausdorffReport& report);
ordered_json assumption_report_json(const AssumptionReport& report);
ordered_json graph_json(const ConnectionGraph& graph);
std::string graph_edge_list(const ConnectionGraph& graph);
ordered_json theorem_b_json(const TheoremBVerdict& verdict);

/// GridFunction wire format: one JSON header line
/// {"dim":..,"n":..,"kind":"u_minus"|"u_plus","lipschitz_bound":..,"residual_norm":..}
/// terminated by '\n', followed by n^dim little-endian float64 values in
/// row-major axis order.
void save_grid_function(const std::filesystem::path& path, const GridFunction& gf);
GridFunction load_grid_function(const std::filesystem::path& path);

std::string grid_function_csv(const GridFunction& gf);

/// Full-precision, locale-independent float formatting ("%.17g").
std::string format_double(double v);

}  // namespace contactdyn::io
