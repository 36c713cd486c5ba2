#include "contactdyn/structure.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace contactdyn {

std::vector<PhasePoint> EquilibriumSet::phase_points() const {
  std::vector<PhasePoint> out;
  out.reserve(items.size());
  for (const auto& e : items) out.push_back(e.phase_point());
  return out;
}

namespace {

constexpr double kNondegeneracyFloor = 1e-8;

/// u with H(x, 0, u) = 0 (monotone in u, so Newton is global here).
double zero_level_u(const HamiltonianModel& model, const VecN& x) {
  double u = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double f = model.value(x, VecN::Zero(model.dim()), u);
    if (std::abs(f) < 1e-15 * std::max(1.0, std::abs(u))) break;
    u -= f / model.grad_u(x, VecN::Zero(model.dim()), u);
  }
  return u;
}

}  // namespace

EquilibriumSet find_equilibria(const HamiltonianModel& model, int grid_density) {
  const int n = model.dim();
  EquilibriumSet set;

  std::vector<VecN> seeds;
  {
    VecN x(n);
    if (n == 1) {
      for (int i = 0; i < grid_density; ++i) {
        x[0] = kTwoPi * i / grid_density;
        seeds.push_back(x);
      }
    } else {
      for (int i = 0; i < grid_density; ++i)
        for (int j = 0; j < grid_density; ++j) {
          x[0] = kTwoPi * i / grid_density;
          x[1] = kTwoPi * j / grid_density;
          seeds.push_back(x);
        }
    }
  }

  auto grad_at = [&](const VecN& x) {
    return model.grad_x(x, VecN::Zero(n), zero_level_u(model, x));
  };

  for (const auto& seed : seeds) {
    VecN x = seed;
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      const VecN g = grad_at(x);
      if (g.norm() <= 1e-12) {
        converged = true;
        break;
      }
      // dG/dx = H_xx + H_xu u'(x); the u-coupling term for the registry
      // families vanishes (H_xu = 0).
      const double u = zero_level_u(model, x);
      MatN jac = model.hess_xx(x, VecN::Zero(n), u);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
      if (!lu.isInvertible()) break;
      const VecN step = lu.solve(g);
      if (!step.allFinite() || step.norm() > kTwoPi) break;
      x = wrap_angles(x - step);
    }
    if (!converged) {
      std::ostringstream os;
      os << "seed (" << seed.transpose() << ") skipped: Newton did not converge";
      set.log.push_back(os.str());
      continue;
    }
    const double u0 = zero_level_u(model, x);
    bool dup = false;
    for (const auto& e : set.items)
      if (torus_distance(e.x0, TorusPoint(x)) < 1e-6) dup = true;
    if (dup) continue;

    Equilibrium eq;
    eq.x0 = TorusPoint(x);
    eq.u0 = u0;
    eq.hessian = model.hess_xx(x, VecN::Zero(n), u0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(eq.hessian);
    eq.morse_index = static_cast<int>((es.eigenvalues().array() < 0.0).count());
    eq.degenerate = std::abs(eq.hessian.determinant()) < kNondegeneracyFloor;
    const MatZ jac = vector_field_jacobian(model, pack_state(eq.phase_point()));
    Eigen::EigenSolver<Eigen::MatrixXd> fes(jac);
    for (Eigen::Index i = 0; i < fes.eigenvalues().size(); ++i)
      eq.spectrum.push_back(fes.eigenvalues()[i]);
    std::sort(eq.spectrum.begin(), eq.spectrum.end(), [](const auto& a, const auto& b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    set.items.push_back(std::move(eq));
  }

  std::sort(set.items.begin(), set.items.end(), [](const Equilibrium& a, const Equilibrium& b) {
    if (a.u0 != b.u0) return a.u0 < b.u0;
    return std::lexicographical_compare(a.x0.coords.begin(), a.x0.coords.end(),
                                        b.x0.coords.begin(), b.x0.coords.end());
  });
  for (const auto& e : set.items) set.any_degenerate = set.any_degenerate || e.degenerate;
  set.anomalous_empty = set.items.empty();
  return set;
}

namespace {

/// Real seed directions spanning the shooting eigenspace, one per real
/// eigenvalue and one per conjugate pair. Under (M-) these are the unstable
/// directions (Re > 0); under (M+) the backward-unstable ones (Re < 0).
std::vector<VecZ> shooting_directions(const Equilibrium& eq, const HamiltonianModel& model) {
  const MatZ jac = vector_field_jacobian(model, pack_state(eq.phase_point()));
  Eigen::EigenSolver<Eigen::MatrixXd> es(jac);
  const double flip = model.sign() == MonotoneSign::Minus ? 1.0 : -1.0;
  std::vector<VecZ> dirs;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const auto ev = es.eigenvalues()[i];
    if (flip * ev.real() <= 1e-8) continue;
    if (ev.imag() < 0.0) continue;  // one representative per conjugate pair
    Eigen::VectorXcd v = es.eigenvectors().col(i);
    Eigen::VectorXd re = v.real();
    if (re.norm() < 1e-12) re = v.imag();
    dirs.push_back(VecZ(re / re.norm()));
  }
  return dirs;
}

}  // namespace

ConnectionGraph detect_connections(const HamiltonianModel& model, const EquilibriumSet& equilibria,
                                   double eps, std::optional<IntegratorConfig> cfg_opt) {
  ConnectionGraph graph;
  graph.nodes = equilibria.items;
  if (equilibria.any_degenerate || equilibria.items.empty()) {
    graph.theorem_b_applicable = false;
    graph.log.push_back("(H4) degenerate equilibria present; connection detection skipped");
    return graph;
  }

  IntegratorConfig cfg;
  if (cfg_opt) {
    cfg = *cfg_opt;
  } else {
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-12;
    cfg.t_final = 400.0 / model.lambda();
  }

  const bool minus = model.sign() == MonotoneSign::Minus;
  const auto targets = equilibria.phase_points();
  for (std::size_t i = 0; i < equilibria.items.size(); ++i) {
    const auto& eq = equilibria.items[i];
    const VecZ z_star = pack_state(eq.phase_point());
    for (const VecZ& dir : shooting_directions(eq, model)) {
      for (double s : {1.0, -1.0}) {
        const VecZ z_seed = z_star + s * eps * dir;
        const PhasePoint seed = unpack_state(z_seed);
        const LimitClassification limit = classify_limit(model, seed, targets, cfg);
        if (limit.kind != LimitClassification::Kind::Equilibrium) {
          std::ostringstream os;
          os << "shooting from node " << i << " (sign " << s << ") undecided: " << limit.note;
          graph.log.push_back(os.str());
          continue;
        }
        if (limit.equilibrium_id == static_cast<int>(i)) continue;  // homoclinic-ish, not an edge

        IntegratorConfig rep_cfg = cfg;
        rep_cfg.direction = minus ? Direction::Forward : Direction::Backward;
        Trajectory rep = integrate(model, seed, rep_cfg);

        // Third Lyapunov function: u increases from source to target (the
        // seed sits O(eps^2) off the zero shell). On backward runs the
        // stored order is reversed.
        for (std::size_t k = 1; k < rep.size(); ++k) {
          const double du = rep.points[k].u - rep.points[k - 1].u;
          if ((minus ? du : -du) < -1e-8)
            throw ContractError("heteroclinic representative violates u-monotonicity");
        }

        const int src = minus ? static_cast<int>(i) : limit.equilibrium_id;
        const int dst = minus ? limit.equilibrium_id : static_cast<int>(i);
        GraphEdge* edge = nullptr;
        for (auto& e : graph.edges)
          if (e.source == src && e.target == dst) edge = &e;
        if (!edge) {
          GraphEdge e;
          e.source = src;
          e.target = dst;
          e.u_min = std::numeric_limits<double>::infinity();
          e.u_max = -e.u_min;
          graph.edges.push_back(std::move(e));
          edge = &graph.edges.back();
        }
        for (const auto& zp : rep.points) {
          edge->u_min = std::min(edge->u_min, zp.u);
          edge->u_max = std::max(edge->u_max, zp.u);
        }
        edge->representatives.push_back(std::move(rep));
      }
    }
  }

  for (const auto& e : graph.edges) {
    if (!(graph.nodes[e.source].u0 < graph.nodes[e.target].u0))
      throw ContractError("detected edge violates the u-ordering of Theorem B");
  }
  return graph;
}

namespace {

/// Distance from z to the segment [a, b] in the product metric, with the
/// x-part unwrapped relative to z (segments are short, so the local chart
/// around z is faithful).
double segment_distance(const PhasePoint& z, const PhasePoint& a, const PhasePoint& b) {
  const int n = z.dim();
  const Eigen::Index m = 2 * n + 1;
  Eigen::VectorXd za(m), zb(m);
  za.head(n) = -torus_diff(z.x.coords, a.x.coords);
  zb.head(n) = za.head(n) + torus_diff(b.x.coords, a.x.coords);
  za.segment(n, n) = a.p - z.p;
  zb.segment(n, n) = b.p - z.p;
  za[2 * n] = a.u - z.u;
  zb[2 * n] = b.u - z.u;
  const Eigen::VectorXd d = zb - za;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? -za.dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (za + t * d).norm();
}

}  // namespace

TheoremBVerdict verify_theorem_b(const ConnectionGraph& graph, const AttractorApprox& cloud,
                                 double tol_struct) {
  TheoremBVerdict v;
  if (!graph.theorem_b_applicable) {
    v.applicable = false;
    return v;
  }

  // Resample representatives densely so polyline interpolation error stays
  // far below tol_struct.
  std::vector<std::vector<PhasePoint>> polylines;
  for (const auto& e : graph.edges) {
    for (const auto& rep : e.representatives) {
      std::vector<PhasePoint> line;
      const double t0 = rep.t_begin(), t1 = rep.t_end();
      const int steps = std::max<int>(64, static_cast<int>(std::ceil(std::abs(t1 - t0) / 0.02)));
      line.reserve(steps + 1);
      for (int k = 0; k <= steps; ++k)
        line.push_back(rep.point_at(t0 + (t1 - t0) * k / steps));
      polylines.push_back(std::move(line));
    }
  }

  for (const auto& z : cloud.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& node : graph.nodes)
      best = std::min(best, phase_distance(z, node.phase_point()));
    for (const auto& line : polylines)
      for (std::size_t k = 0; k + 1 < line.size(); ++k)
        best = std::min(best, segment_distance(z, line[k], line[k + 1]));
    if (best > v.max_cloud_distance) {
      v.max_cloud_distance = best;
      if (best > tol_struct) {
        v.containment_ok = false;
        v.containment_witness = z;
      }
    }
  }

  for (const auto& e : graph.edges)
    if (!(graph.nodes[e.source].u0 < graph.nodes[e.target].u0)) v.ordering_ok = false;

  v.cluster_count = single_linkage_cluster_count(cloud.points);
  if (v.cluster_count == 1 && graph.nodes.size() > 1) {
    std::vector<int> parent(graph.nodes.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    for (const auto& e : graph.edges) parent[find(e.source)] = find(e.target);
    int comps = 0;
    for (std::size_t i = 0; i < parent.size(); ++i)
      if (find(static_cast<int>(i)) == static_cast<int>(i)) ++comps;
    v.connectivity_ok = comps == 1;
  }
  return v;
}

ReducedSystem reduce_discounted(const HamiltonianModel& model) {
  if (model.family() != Family::Discounted)
    throw ContractError("reduce_discounted requires the Discounted family");
  return ReducedSystem{model, model.lambda()};
}

ReducedState ReducedTrajectory::state_at(double t) const {
  if (dense.empty()) throw ContractError("reduced trajectory has no dense segments");
  const bool fwd = dense.front().h > 0.0;
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

ReducedTrajectory integrate_reduced(const ReducedSystem& sys, const VecN& x0, const VecN& p0,
                                    double t_final, double rel_tol, double abs_tol) {
  const int n = sys.base.dim();
  auto rhs = [&](double, const ReducedState& y, ReducedState& dy) {
    const VecN x = y.head(n);
    const VecN p = y.segment(n, n);
    dy.resize(2 * n);
    dy.head(n) = sys.h_p(x, p);
    dy.segment(n, n) = -sys.h_x(x, p) - sys.lambda * p;
  };
  ReducedState y0(2 * n);
  y0.head(n) = x0;
  y0.segment(n, n) = p0;

  detail::StepControl ctl;
  ctl.rel_tol = rel_tol;
  ctl.abs_tol = abs_tol;
  ctl.underflow_step = 1e-14 * std::abs(t_final);

  ReducedTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(y0);
  auto on_step = [&](double t, const ReducedState& y, const ReducedState&,
                     const detail::DenseSegment<ReducedState>& seg) {
    traj.times.push_back(t);
    traj.states.push_back(y);
    traj.dense.push_back(seg);
    return true;
  };
  const auto status = detail::integrate_adaptive(rhs, 0.0, t_final, y0, ctl, on_step);
  if (status == detail::RunStatus::StepUnderflow)
    throw SolverError("integrate_reduced: step underflow");
  return traj;
}

LiftResult lift_discounted(const ReducedSystem& sys, const VecN& x0, const VecN& p0,
                           const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw DomainError("empty time grid");
  const int n = sys.base.dim();
  const double t_span = *std::max_element(t_grid.begin(), t_grid.end());
  const double fd = 1e-2;  // five-point stencil half-width
  const ReducedTrajectory red = integrate_reduced(sys, x0, p0, t_span + 2.5 * fd, 1e-11, 1e-13);

  // The full model evaluating the lifted curve.
  const HamiltonianModel& full = sys.base;

  auto lift_state = [&](double t) {
    const ReducedState y = red.state_at(t);
    const VecN x = y.head(n);
    const VecN p = y.segment(n, n);
    return pack_state(x, p, -sys.h(x, p) / sys.lambda);
  };

  LiftResult out;
  Trajectory& traj = out.trajectory;
  for (double t : t_grid) {
    if (t < 0.0 || t > t_span) throw DomainError("t_grid exceeds the integrated span");
    const VecZ z = lift_state(t);
    const PhasePoint zp = unpack_state(z);
    traj.times.push_back(t);
    traj.points.push_back(zp);
    const double h_val = full.value(zp.x.coords, zp.p, zp.u);
    traj.h_values.push_back(h_val);
    out.max_identity_error =
        std::max(out.max_identity_error, std::abs(sys.lambda * zp.u + sys.h(zp.x.coords, zp.p)));

    // Five-point central difference of the lifted curve against X_H; the
    // stencil center shifts right near t = 0 to stay inside the span.
    const double tc = std::max(t, 2.0 * fd);
    VecZ d = (-lift_state(tc + 2 * fd) + 8.0 * lift_state(tc + fd) - 8.0 * lift_state(tc - fd) +
              lift_state(tc - 2 * fd)) /
             (12.0 * fd);
    const VecZ f = eval_vector_field_packed(full, lift_state(tc));
    out.max_field_residual = std::max(out.max_field_residual, (d - f).norm());
  }
  traj.termination = Termination::ReachedTFinal;
  return out;
}

double conformal_decay_check(const ReducedSystem& sys, const VecN& x0, const VecN& p0,
                             double t_final, int t_samples) {
  const int n = sys.base.dim();
  const int m = 2 * n;
  // State: (x, p) followed by the variational matrix J, row-major.
  using BigState = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDim + 4 * kMaxDim * kMaxDim, 1>;

  auto rhs = [&](double, const BigState& y, BigState& dy) {
    const VecN x = y.head(n);
    const VecN p = y.segment(n, n);
    dy.resize(m + m * m);
    dy.head(n) = sys.h_p(x, p);
    dy.segment(n, n) = -sys.h_x(x, p) - sys.lambda * p;

    // DX of the reduced field.
    const MatN hpp = sys.base.hess_pp(x, p, 0.0);
    const MatN hxx = sys.base.hess_xx(x, p, 0.0);
    const MatN hxp = sys.base.hess_xp(x, p, 0.0);
    Eigen::MatrixXd dx(m, m);
    dx.block(0, 0, n, n) = hxp.transpose();
    dx.block(0, n, n, n) = hpp;
    dx.block(n, 0, n, n) = -hxx;
    dx.block(n, n, n, n) = -hxp - sys.lambda * MatN::Identity(n, n);

    Eigen::MatrixXd jmat(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) jmat(r, c) = y[m + r * m + c];
    const Eigen::MatrixXd dj = dx * jmat;
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) dy[m + r * m + c] = dj(r, c);
  };

  BigState y0(m + m * m);
  y0.head(n) = x0;
  y0.segment(n, n) = p0;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) y0[m + r * m + c] = r == c ? 1.0 : 0.0;

  detail::StepControl ctl;
  ctl.rel_tol = 1e-11;
  ctl.abs_tol = 1e-13;
  ctl.underflow_step = 1e-14 * t_final;

  std::vector<detail::DenseSegment<BigState>> segs;
  auto on_step = [&](double, const BigState&, const BigState&,
                     const detail::DenseSegment<BigState>& seg) {
    segs.push_back(seg);
    return true;
  };
  const auto status = detail::integrate_adaptive(rhs, 0.0, t_final, y0, ctl, on_step);
  if (status != detail::RunStatus::ReachedEnd)
    throw SolverError("conformal_decay_check: integration failed");

  double worst = 0.0;
  std::size_t seg_idx = 0;
  for (int k = 0; k <= t_samples - 1; ++k) {
    const double t = t_final * k / (t_samples - 1);
    while (seg_idx + 1 < segs.size() && segs[seg_idx].t0 + segs[seg_idx].h < t) ++seg_idx;
    const BigState y = segs[seg_idx].eval(t);
    Eigen::MatrixXd jmat(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) jmat(r, c) = y[m + r * m + c];
    const double expected = std::exp(-n * sys.lambda * t);
    worst = std::max(worst, std::abs(jmat.determinant() - expected) / expected);
  }
  return worst;
}

}  // namespace contactdyn
