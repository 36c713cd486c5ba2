#pragma once

#include <optional>
#include <string>
#include <vector>

#include "contactdyn/detail/dopri5.hpp"
#include "contactdyn/hj.hpp"
#include "contactdyn/model.hpp"

namespace contactdyn {

enum class Direction { Forward, Backward };

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double max_step = std::numeric_limits<double>::infinity();
  double t_final = 10.0;  // magnitude; sign comes from direction
  Direction direction = Direction::Forward;
  double blow_up_radius = 1e6;
  double equilibrium_tol = 1e-9;  // on |X_H|

  void validate() const;
};

enum class Termination { ReachedTFinal, ConvergedToEquilibrium, BlowUp, StepUnderflow };

std::string to_string(Termination t);

/// A time-stamped orbit of the phase flow. Points are stored at the accepted
/// integrator steps with H per step, and F = u-(x) - u (resp. u - u+(x))
/// when a grid solution is attached. Dense interpolation covers every step.
struct Trajectory {
  std::vector<double> times;  // strictly monotone; decreasing on backward runs
  std::vector<PhasePoint> points;
  std::vector<double> h_values;
  std::vector<double> f_values;  // empty unless a GridFunction was attached
  Termination termination = Termination::ReachedTFinal;
  std::optional<PhasePoint> termination_witness;

  std::vector<detail::DenseSegment<VecZ>> dense;

  std::size_t size() const { return times.size(); }
  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }

  /// Dense-output state at any time inside the integrated span (x unwrapped).
  VecZ state_at(double t) const;
  PhasePoint point_at(double t) const { return unpack_state(state_at(t)); }
};

/// Integrates the contact flow from z0. Stops early on numerical blow-up
/// (|u| + |p| > blow_up_radius), on convergence to an equilibrium
/// (|X_H| < equilibrium_tol across a full step), or on step underflow.
/// With uref attached, records F along the orbit.
Trajectory integrate(const HamiltonianModel& model, const PhasePoint& z0,
                     const IntegratorConfig& cfg, const GridFunction* uref = nullptr);

/// Max deviation |H(z(t)) - exp(-int_0^t dH/du ds) H(z(0))| over stored
/// steps; the exponent is accumulated by Simpson quadrature on dense output.
double energy_residual(const HamiltonianModel& model, const Trajectory& traj);

/// True if H never changes sign along the stored orbit (dead band for
/// orbits pinned to H = 0 numerically).
bool h_sign_constant(const Trajectory& traj, double band = 1e-10);

struct LyapunovVerdict {
  bool ok = true;
  double max_margin = 0.0;  // largest bound violation, <= 0 when ok
  double witness_time = 0.0;

  explicit operator bool() const { return ok; }
};

/// Checks |H(z(t))| <= e^{-lambda |t - t0|} |H(z0)| (1 + 1e-7) + abs_slack at
/// every stored step (forward under (M-), backward under (M+)).
LyapunovVerdict check_first_lyapunov(const HamiltonianModel& model, const Trajectory& traj,
                                     double abs_slack = 1e-10);

/// Checks F(z(t+s)) <= e^{-lambda s} F(z(t)) + grid slack for every stored
/// pair with F(z(t)) >= 0. The trajectory must carry f_values from uref.
LyapunovVerdict check_second_lyapunov(const HamiltonianModel& model, const Trajectory& traj,
                                      const GridFunction& uref);

struct LimitClassification {
  enum class Kind { Equilibrium, None, Undecided } kind = Kind::Undecided;
  int equilibrium_id = -1;
  double t_reached = 0.0;
  std::string note;
};

/// Runs the flow (forward under (M-), backward under (M+)) until the state
/// is within 1e-6 of one of the given equilibria with |X_H| below tolerance,
/// or gives up at t_max.
LimitClassification classify_limit(const HamiltonianModel& model, const PhasePoint& z0,
                                   const std::vector<PhasePoint>& equilibria,
                                   const IntegratorConfig& cfg);

}  // namespace contactdyn
