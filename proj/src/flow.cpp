#include "contactdyn/flow.hpp"

#include <algorithm>
#include <cmath>

namespace contactdyn {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("tolerances must be positive");
  if (!(t_final > 0.0)) throw DomainError("t_final must be positive (sign via direction)");
  if (!(blow_up_radius > 0.0) || !(equilibrium_tol > 0.0))
    throw DomainError("thresholds must be positive");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTFinal: return "reached-t-final";
    case Termination::ConvergedToEquilibrium: return "converged-to-equilibrium";
    case Termination::BlowUp: return "blow-up";
    case Termination::StepUnderflow: return "step-underflow";
  }
  return "?";
}

VecZ Trajectory::state_at(double t) const {
  if (dense.empty()) throw ContractError("trajectory has no dense segments");
  const bool fwd = dense.front().h > 0.0;
  // Binary search for the segment containing t.
  std::size_t lo = 0, hi = dense.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const double t_end = dense[mid].t0 + dense[mid].h;
    if (fwd ? t <= t_end : t >= t_end)
      hi = mid;
    else
      lo = mid + 1;
  }
  return dense[lo].eval(t);
}

Trajectory integrate(const HamiltonianModel& model, const PhasePoint& z0,
                     const IntegratorConfig& cfg, const GridFunction* uref) {
  cfg.validate();
  if (!z0.finite()) throw DomainError("initial phase point has non-finite components");
  if (uref && uref->grid.dim != model.dim())
    throw ContractError("attached grid solution has wrong dimension");

  const int n = model.dim();
  const double sign = cfg.direction == Direction::Forward ? 1.0 : -1.0;
  const double t_end = sign * cfg.t_final;

  auto rhs = [&](double, const VecZ& y, VecZ& dy) { dy = eval_vector_field_packed(model, y); };

  Trajectory traj;
  auto record = [&](double t, const VecZ& y) {
    traj.times.push_back(t);
    PhasePoint z = unpack_state(y);
    traj.points.push_back(z);
    traj.h_values.push_back(model.value(z.x.coords, z.p, z.u));
    if (uref) {
      const double ux = interpolate(*uref, z.x.coords);
      traj.f_values.push_back(uref->kind == SolutionKind::UMinus ? ux - z.u : z.u - ux);
    }
  };

  VecZ y0 = pack_state(z0);
  record(0.0, y0);

  detail::StepControl ctl;
  ctl.rel_tol = cfg.rel_tol;
  ctl.abs_tol = cfg.abs_tol;
  ctl.max_step = cfg.max_step;
  ctl.underflow_step = 1e-14 * cfg.t_final;

  double prev_field_norm = eval_vector_field_packed(model, y0).norm();
  traj.termination = Termination::ReachedTFinal;

  auto on_step = [&](double t, const VecZ& y, const VecZ& f, const detail::DenseSegment<VecZ>& seg) {
    record(t, y);
    traj.dense.push_back(seg);
    const double pu_size = y.segment(n, n).norm() + std::abs(y[2 * n]);
    if (pu_size > cfg.blow_up_radius) {
      traj.termination = Termination::BlowUp;
      traj.termination_witness = traj.points.back();
      return false;
    }
    const double field_norm = f.norm();
    if (field_norm < cfg.equilibrium_tol && prev_field_norm < cfg.equilibrium_tol) {
      traj.termination = Termination::ConvergedToEquilibrium;
      traj.termination_witness = traj.points.back();
      return false;
    }
    prev_field_norm = field_norm;
    return true;
  };

  const auto status = detail::integrate_adaptive(rhs, 0.0, t_end, y0, ctl, on_step);
  if (status == detail::RunStatus::StepUnderflow) traj.termination = Termination::StepUnderflow;
  return traj;
}

double energy_residual(const HamiltonianModel& model, const Trajectory& traj) {
  if (traj.size() <= 1) return 0.0;
  if (traj.dense.size() + 1 != traj.size())
    throw ContractError("energy_residual needs a trajectory produced by integrate");
  const double h0 = traj.h_values.front();
  const int n = model.dim();
  auto hu_at = [&](const VecZ& y) {
    return model.grad_u(VecN(y.head(n)), VecN(y.segment(n, n)), y[2 * n]);
  };

  double integral = 0.0;  // int_0^t dH/du ds, signed with the run direction
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const auto& seg = traj.dense[k];
    const double ta = traj.times[k], tb = traj.times[k + 1];
    const double tm = 0.5 * (ta + tb);
    const double fa = hu_at(seg.eval(ta));
    const double fm = hu_at(seg.eval(tm));
    const double fb = hu_at(seg.eval(tb));
    integral += (tb - ta) / 6.0 * (fa + 4.0 * fm + fb);
    const double predicted = std::exp(-integral) * h0;
    worst = std::max(worst, std::abs(traj.h_values[k + 1] - predicted));
  }
  return worst;
}

bool h_sign_constant(const Trajectory& traj, double band) {
  double scale = 0.0;
  for (double h : traj.h_values) scale = std::max(scale, std::abs(h));
  const double dead = band * std::max(1.0, scale);
  bool pos = false, neg = false;
  for (double h : traj.h_values) {
    pos = pos || h > dead;
    neg = neg || h < -dead;
  }
  return !(pos && neg);
}

LyapunovVerdict check_first_lyapunov(const HamiltonianModel& model, const Trajectory& traj,
                                     double abs_slack) {
  LyapunovVerdict v;
  const double h0 = std::abs(traj.h_values.front());
  const double t0 = traj.times.front();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double elapsed = std::abs(traj.times[k] - t0);
    const double bound = std::exp(-model.lambda() * elapsed) * h0 * (1.0 + 1e-7) + abs_slack;
    const double margin = std::abs(traj.h_values[k]) - bound;
    if (margin > v.max_margin) {
      v.max_margin = margin;
      v.witness_time = traj.times[k];
      v.ok = false;
    }
  }
  if (v.ok) {
    // Report the tightest approach to the bound as a non-positive margin.
    v.max_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const double elapsed = std::abs(traj.times[k] - t0);
      const double bound = std::exp(-model.lambda() * elapsed) * h0 * (1.0 + 1e-7) + abs_slack;
      v.max_margin = std::max(v.max_margin, std::abs(traj.h_values[k]) - bound);
    }
  }
  return v;
}

LyapunovVerdict check_second_lyapunov(const HamiltonianModel& model, const Trajectory& traj,
                                      const GridFunction& uref) {
  const bool minus = model.sign() == MonotoneSign::Minus;
  if (minus != (uref.kind == SolutionKind::UMinus))
    throw ContractError("grid solution kind does not match the model's monotone sign");
  if (traj.f_values.size() != traj.size())
    throw ContractError("trajectory carries no F values; integrate with uref attached");

  const double slack = uref.grid_slack();
  LyapunovVerdict v;
  v.max_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double fk = traj.f_values[k];
    if (fk < 0.0) continue;
    for (std::size_t j = k + 1; j < traj.size(); ++j) {
      const double s = std::abs(traj.times[j] - traj.times[k]);
      const double bound = std::exp(-model.lambda() * s) * fk + slack;
      const double margin = traj.f_values[j] - bound;
      if (margin > v.max_margin) {
        v.max_margin = margin;
        v.witness_time = traj.times[j];
      }
    }
  }
  v.ok = v.max_margin <= 0.0;
  return v;
}

LimitClassification classify_limit(const HamiltonianModel& model, const PhasePoint& z0,
                                   const std::vector<PhasePoint>& equilibria,
                                   const IntegratorConfig& cfg) {
  IntegratorConfig run = cfg;
  run.direction =
      model.sign() == MonotoneSign::Minus ? Direction::Forward : Direction::Backward;

  LimitClassification out;
  const Trajectory traj = integrate(model, z0, run);
  if (traj.termination == Termination::BlowUp) {
    out.kind = LimitClassification::Kind::None;
    out.note = "blow-up before decision";
    return out;
  }
  const PhasePoint& last = traj.points.back();
  if (traj.termination == Termination::ConvergedToEquilibrium ||
      eval_vector_field(model, last).norm() < cfg.equilibrium_tol) {
    for (std::size_t i = 0; i < equilibria.size(); ++i) {
      if (phase_distance(last, equilibria[i]) < 1e-6) {
        out.kind = LimitClassification::Kind::Equilibrium;
        out.equilibrium_id = static_cast<int>(i);
        out.t_reached = traj.times.back();
        return out;
      }
    }
    out.kind = LimitClassification::Kind::None;
    out.note = "converged away from every known equilibrium";
    return out;
  }
  out.kind = LimitClassification::Kind::Undecided;
  out.t_reached = traj.times.back();
  out.note = "t_max reached";
  return out;
}

}  // namespace contactdyn
