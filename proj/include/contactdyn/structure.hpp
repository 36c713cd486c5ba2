#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "contactdyn/attractor.hpp"
#include "contactdyn/flow.hpp"

namespace contactdyn {

/// An equilibrium (x0, 0, u0) of X_H with its Morse data and the spectrum of
/// the full (2n+1)-dimensional linearization.
struct Equilibrium {
  TorusPoint x0;
  double u0 = 0.0;
  MatN hessian;    // d2/dx2 of x -> H(x, 0, u0)
  int morse_index = 0;
  std::vector<std::complex<double>> spectrum;
  bool degenerate = false;  // |det hessian| below the nondegeneracy floor

  PhasePoint phase_point() const { return PhasePoint(x0, VecN::Zero(x0.dim()), u0); }
};

struct EquilibriumSet {
  std::vector<Equilibrium> items;
  bool any_degenerate = false;
  bool anomalous_empty = false;  // empty despite (H2)+(H3): flagged, not fatal
  std::vector<std::string> log;

  std::vector<PhasePoint> phase_points() const;
};

/// Finds F_H: per coarse-grid seed, solve H(x,0,u) = 0 for u, then Newton on
/// x -> dH/dx(x, 0, u(x)); deduplicates within torus distance 1e-6.
EquilibriumSet find_equilibria(const HamiltonianModel& model, int grid_density = 16);

struct GraphEdge {
  int source = 0;
  int target = 0;
  std::vector<Trajectory> representatives;  // one per converged shooting orbit
  double u_min = 0.0;
  double u_max = 0.0;
};

/// Equilibria as nodes, detected heteroclinic orbits as u-ordered edges.
struct ConnectionGraph {
  std::vector<Equilibrium> nodes;
  std::vector<GraphEdge> edges;
  bool theorem_b_applicable = true;  // false when (H4) failed
  std::vector<std::string> log;
};

/// Shoots along every unstable eigendirection (both signs) of each
/// nondegenerate equilibrium and classifies the limit; converged runs with a
/// distinct target become edges. Under (M+) the shot runs backward from the
/// backward-unstable directions and the detected node is the edge source.
/// u must increase from source to target along every representative (up to
/// integrator tolerance); violations throw. Without a config, runs with
/// t_final = 400/lambda and tight tolerances.
ConnectionGraph detect_connections(const HamiltonianModel& model, const EquilibriumSet& equilibria,
                                   double eps = 1e-5,
                                   std::optional<IntegratorConfig> cfg = std::nullopt);

struct TheoremBVerdict {
  bool applicable = true;
  bool containment_ok = true;
  double max_cloud_distance = 0.0;
  std::optional<PhasePoint> containment_witness;
  bool ordering_ok = true;
  bool connectivity_ok = true;
  int cluster_count = 0;

  bool ok() const { return applicable && containment_ok && ordering_ok && connectivity_ok; }
};

/// Checks (i) the attractor cloud lies within tol_struct of the equilibria
/// plus representative-orbit polylines, (ii) every edge is u-ordered,
/// (iii) the graph is weakly connected whenever the cloud clusters to one
/// component.
TheoremBVerdict verify_theorem_b(const ConnectionGraph& graph, const AttractorApprox& cloud,
                                 double tol_struct = 1e-2);

/// The (x, p) part of a discounted Hamiltonian H = lambda*u + h(x, p).
struct ReducedSystem {
  HamiltonianModel base;  // evaluated at u = 0: h(x,p) = H(x,p,0)
  double lambda = 0.0;

  double h(const VecN& x, const VecN& p) const { return base.value(x, p, 0.0); }
  VecN h_x(const VecN& x, const VecN& p) const { return base.grad_x(x, p, 0.0); }
  VecN h_p(const VecN& x, const VecN& p) const { return base.grad_p(x, p, 0.0); }
};

/// Extracts the reduced (conformally symplectic) vector field
/// (dh/dp, -dh/dx - lambda p). Contract error unless family == Discounted.
ReducedSystem reduce_discounted(const HamiltonianModel& model);

/// Reduced state (x, p) packed as a 2n-vector.
using ReducedState = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDim, 1>;

struct ReducedTrajectory {
  std::vector<double> times;
  std::vector<ReducedState> states;
  std::vector<detail::DenseSegment<ReducedState>> dense;

  ReducedState state_at(double t) const;
};

ReducedTrajectory integrate_reduced(const ReducedSystem& sys, const VecN& x0, const VecN& p0,
                                    double t_final, double rel_tol = 1e-10,
                                    double abs_tol = 1e-12);

struct LiftResult {
  Trajectory trajectory;
  double max_identity_error = 0.0;  // max |lambda*u + h| over the grid
  double max_field_residual = 0.0;  // finite-difference check of the full field
};

/// Lifts a reduced orbit to the zero energy shell via u = -h/lambda and
/// verifies both the algebraic identity and the full contact field residual
/// (five-point finite differences on dense output).
LiftResult lift_discounted(const ReducedSystem& sys, const VecN& x0, const VecN& p0,
                           const std::vector<double>& t_grid);

/// Integrates the variational (Jacobian) flow along a reduced orbit and
/// returns max_t |det Dphi^t - e^{-n lambda t}| / e^{-n lambda t}.
double conformal_decay_check(const ReducedSystem& sys, const VecN& x0, const VecN& p0,
                             double t_final, int t_samples = 201);

}  // namespace contactdyn
