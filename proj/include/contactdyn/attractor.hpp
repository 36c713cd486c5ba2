#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "contactdyn/flow.hpp"
#include "contactdyn/hj.hpp"

namespace contactdyn {

/// Trapping-set data: delta, the Y(e,U) parameters backing compactness, and
/// the solved grid solution defining F. Membership tests use
///   Y       = {|H| <= 1e-9, F <= grid slack}
///   Y_delta = {H < delta, F < delta}.
struct TrappingSpec {
  double delta = 0.5;
  double e_bound = 0.5;          // the e of Y(e, U); equals delta
  double u_bound = 0.0;          // the U of Y(e, U): extreme grid value of u+-
  double coercivity_radius = 0.0;  // P(delta, u_bound -+ delta)
  GridFunction uref;

  double grid_slack() const { return uref.grid_slack(); }
};

/// Builds trapping-set data from a solved grid function (kind must match
/// the model's monotone sign).
TrappingSpec make_trapping_spec(const HamiltonianModel& model, GridFunction uref,
                                double delta = 0.5);

enum class Membership { InY, InYDelta, Outside };

Membership membership(const TrappingSpec& spec, const HamiltonianModel& model,
                      const PhasePoint& z);

/// F(z) = u-(x) - u under (M-), u - u+(x) under (M+).
double lyapunov_f(const TrappingSpec& spec, const PhasePoint& z);

/// Rejection-samples n points of the closed trapping set, reproducibly per
/// seed. Kept points additionally satisfy |H| < delta (a two-sided energy
/// band): the band intersected with {F < delta} is itself a compact
/// forward-invariant set containing Y, and it is the set whose forward
/// images carry the exponential |H| diagnostics.
std::vector<PhasePoint> sample_trapping_set(const TrappingSpec& spec,
                                            const HamiltonianModel& model, std::int64_t n,
                                            std::uint64_t seed);

/// Finite-time image cloud approximating the maximal attractor.
struct AttractorApprox {
  std::vector<PhasePoint> points;
  double t_horizon = 0.0;
  double delta = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> h_diag;  // H per point
  std::vector<double> f_diag;  // F per point
};

/// Integrates every trapping-set sample to time T (-T under (M+)) and
/// asserts the exponential |H| and F bounds on the image cloud.
/// threads > 1 parallelizes per-point integration deterministically.
AttractorApprox approximate_attractor(const HamiltonianModel& model, const TrappingSpec& spec,
                                      double t_horizon, std::int64_t n, std::uint64_t seed,
                                      const IntegratorConfig& cfg, int threads = 1);

struct HausdorffReport {
  double d_ab = 0.0;  // sup_a inf_b dist
  double d_ba = 0.0;
  double distance() const { return std::max(d_ab, d_ba); }
};

HausdorffReport hausdorff(const std::vector<PhasePoint>& a, const std::vector<PhasePoint>& b);

struct GraphPropertyVerdict {
  bool injective = true;
  std::optional<std::pair<PhasePoint, PhasePoint>> witness;
};

/// Checks that forgetting u is injective on the cloud: no pair shares (x, p)
/// within 1e-6 while differing in u by more than 1e-4.
GraphPropertyVerdict graph_property_check(const AttractorApprox& approx);

struct RetractionVerdict {
  bool contained = true;
  std::optional<PhasePoint> witness;
  double witness_t = 0.0;
  double max_h_excess = 0.0;  // max of H - delta over probed points
  double max_f_excess = 0.0;
};

/// Evaluates the two-stage deformation (straight line in p to P*(x,u), then
/// sliding u to the grid solution along P*) on sampled trapping-set points
/// and checks every intermediate point stays in the closure of Y_delta.
RetractionVerdict retraction_probe(const HamiltonianModel& model, const TrappingSpec& spec,
                                   std::int64_t samples, std::uint64_t seed, int t_steps = 21);

/// Single-linkage component count at threshold scale * (mean nearest-
/// neighbour distance); the connectedness proxy for the cloud.
int single_linkage_cluster_count(const std::vector<PhasePoint>& cloud, double scale = 5.0);

}  // namespace contactdyn
