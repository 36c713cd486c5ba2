#include "contactdyn/hj.hpp"

#include <algorithm>
#include <cmath>

#include "contactdyn/assumptions.hpp"

namespace contactdyn {

namespace {
bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Grid::Grid(int dim_, int n_per_axis_) : dim(dim_), n_per_axis(n_per_axis_) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("grid dimension must be 1 or 2");
  if (!is_power_of_two(n_per_axis) || n_per_axis < 32)
    throw DomainError("points per axis must be a power of two >= 32");
  h = kTwoPi / n_per_axis;  // exact: division by a power of two
}

double interpolate(const GridFunction& gf, const VecN& x) {
  const Grid& g = gf.grid;
  if (x.size() != g.dim) throw DomainError("interpolation point dimension mismatch");
  double w[kMaxDim] = {0.0, 0.0};
  int i0[kMaxDim] = {0, 0};
  for (int a = 0; a < g.dim; ++a) {
    const double s = wrap_angle(x[a]) / g.h;
    const double f = std::floor(s);
    i0[a] = static_cast<int>(f);
    w[a] = s - f;
    if (i0[a] >= g.n_per_axis) {  // wrap_angle can return just below 2*pi
      i0[a] = g.n_per_axis - 1;
      w[a] = 1.0;
    }
  }
  if (g.dim == 1) {
    const double v0 = gf.values[g.index(i0[0])];
    const double v1 = gf.values[g.index(i0[0] + 1)];
    return (1.0 - w[0]) * v0 + w[0] * v1;
  }
  const double v00 = gf.values[g.index(i0[0], i0[1])];
  const double v01 = gf.values[g.index(i0[0], i0[1] + 1)];
  const double v10 = gf.values[g.index(i0[0] + 1, i0[1])];
  const double v11 = gf.values[g.index(i0[0] + 1, i0[1] + 1)];
  const double a0 = (1.0 - w[1]) * v00 + w[1] * v01;
  const double a1 = (1.0 - w[1]) * v10 + w[1] * v11;
  return (1.0 - w[0]) * a0 + w[0] * a1;
}

double OneSidedGradients::max_norm() const {
  const std::int64_t m = forward.empty() ? 0 : forward[0].size();
  double best = 0.0;
  for (std::int64_t i = 0; i < m; ++i) {
    double f2 = 0.0, b2 = 0.0;
    for (std::size_t a = 0; a < forward.size(); ++a) {
      f2 += forward[a][i] * forward[a][i];
      b2 += backward[a][i] * backward[a][i];
    }
    best = std::max({best, f2, b2});
  }
  return std::sqrt(best);
}

OneSidedGradients one_sided_gradients(const GridFunction& gf) {
  const Grid& g = gf.grid;
  OneSidedGradients out;
  out.grid = g;
  out.forward.assign(g.dim, Eigen::ArrayXd(g.node_count()));
  out.backward.assign(g.dim, Eigen::ArrayXd(g.node_count()));
  const int n = g.n_per_axis;
  if (g.dim == 1) {
    for (int i = 0; i < n; ++i) {
      const double c = gf.values[g.index(i)];
      out.forward[0][g.index(i)] = (gf.values[g.index(i + 1)] - c) / g.h;
      out.backward[0][g.index(i)] = (c - gf.values[g.index(i - 1)]) / g.h;
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const auto id = g.index(i, j);
        const double c = gf.values[id];
        out.forward[0][id] = (gf.values[g.index(i + 1, j)] - c) / g.h;
        out.backward[0][id] = (c - gf.values[g.index(i - 1, j)]) / g.h;
        out.forward[1][id] = (gf.values[g.index(i, j + 1)] - c) / g.h;
        out.backward[1][id] = (c - gf.values[g.index(i, j - 1)]) / g.h;
      }
  }
  return out;
}

namespace {

/// Monotone root of u -> H(x, 0, u): Newton guarded by expanding bisection.
double zero_section_root(const HamiltonianModel& model, const VecN& x) {
  const double lam = model.lambda();
  double u = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double f = model.value(x, VecN::Zero(model.dim()), u);
    if (std::abs(f) < 1e-14 * std::max(1.0, std::abs(u) * lam)) return u;
    const double df = model.grad_u(x, VecN::Zero(model.dim()), u);
    u -= f / df;
    if (std::abs(u) > 1e6)
      throw SolverError("constant_bounds: root not bracketed within |u| <= 1e6");
  }
  return u;
}

}  // namespace

std::pair<double, double> constant_bounds(const HamiltonianModel& model, const Grid& grid) {
  if (grid.dim != model.dim()) throw DomainError("grid/model dimension mismatch");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const std::int64_t m = grid.node_count();
  for (std::int64_t i = 0; i < m; ++i) {
    const double u = zero_section_root(model, grid.node(i));
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  return {lo, hi};
}

namespace {

struct LaxFriedrichsSetup {
  VecN sigma;       // per-axis viscosity
  double dtau = 0.0;
  double u_lower = 0.0;
  double u_upper = 0.0;
  double p_box = 0.0;  // a-priori gradient radius P(0, U_lower)
};

LaxFriedrichsSetup lf_setup(const HamiltonianModel& model, const Grid& grid) {
  LaxFriedrichsSetup s;
  auto [lo, hi] = constant_bounds(model, grid);
  s.u_lower = lo;
  s.u_upper = hi;
  s.p_box = coercivity_radius(model, 0.0, lo);

  // sigma_i >= max |dH/dp_i| over the box {|p| <= P, u in [lo, hi]},
  // sampled on a lattice (H_p is x- and u-independent for the registry
  // families, but sample anyway).
  const int n = grid.dim;
  s.sigma = VecN::Zero(n);
  const int mp = 17, mx = 8, mu = 3;
  const std::int64_t np = n == 1 ? mp : mp * mp;
  const std::int64_t nx = n == 1 ? mx : mx * mx;
  VecN p(n), x(n);
  for (std::int64_t ip = 0; ip < np; ++ip) {
    p[0] = -s.p_box + 2.0 * s.p_box * (n == 1 ? ip : ip / mp) / (mp - 1);
    if (n == 2) {
      p[1] = -s.p_box + 2.0 * s.p_box * (ip % mp) / (mp - 1);
      if (p.norm() > s.p_box * 1.0000001) continue;
    }
    for (std::int64_t ix = 0; ix < nx; ++ix) {
      x[0] = kTwoPi * (n == 1 ? ix : ix / mx) / mx;
      if (n == 2) x[1] = kTwoPi * (ix % mx) / mx;
      for (int iu = 0; iu < mu; ++iu) {
        const double u = lo + (hi - lo) * iu / (mu - 1.0);
        const VecN g = model.grad_p(x, p, u);
        for (int a = 0; a < n; ++a) s.sigma[a] = std::max(s.sigma[a], std::abs(g[a]));
      }
    }
  }
  s.dtau = 0.45 * grid.h / (s.sigma.sum() + model.lambda() * grid.h);
  return s;
}

}  // namespace

GridFunction solve_hj(const HamiltonianModel& model, const Grid& grid, double tol,
                      HjSolveStats* stats, std::int64_t max_iters) {
  if (model.sign() == MonotoneSign::Plus) {
    // u+ = -(solution of the (M-) problem for H(x,-p,-u)).
    GridFunction gf = solve_hj(model.mirrored(), grid, tol, stats, max_iters);
    gf.values = -gf.values;
    gf.kind = SolutionKind::UPlus;
    return gf;
  }

  if (grid.dim != model.dim()) throw DomainError("grid/model dimension mismatch");
  if (tol <= 0.0) tol = 1e-10 * model.lambda();

  const LaxFriedrichsSetup s = lf_setup(model, grid);
  const std::int64_t m = grid.node_count();
  const int n = grid.dim;
  const int na = grid.n_per_axis;

  Eigen::ArrayXd u = Eigen::ArrayXd::Constant(m, s.u_upper);
  Eigen::ArrayXd unew(m);
  Eigen::ArrayXd snapshot = u;

  HjSolveStats st;
  st.sigma_sum = s.sigma.sum();
  st.dtau = s.dtau;

  double update = std::numeric_limits<double>::infinity();
  std::int64_t it = 0;
  VecN davg(n), x(n);
  for (; it < max_iters && update > tol; ++it) {
    update = 0.0;
    if (n == 1) {
      for (int i = 0; i < na; ++i) {
        const std::int64_t id = grid.index(i);
        const double c = u[id];
        const double dp = (u[grid.index(i + 1)] - c) / grid.h;
        const double dm = (c - u[grid.index(i - 1)]) / grid.h;
        davg[0] = 0.5 * (dp + dm);
        x[0] = grid.h * i;
        const double hnum = model.value(x, davg, c) - 0.5 * s.sigma[0] * (dp - dm);
        unew[id] = c - s.dtau * hnum;
        update = std::max(update, std::abs(s.dtau * hnum));
      }
    } else {
      for (int i = 0; i < na; ++i)
        for (int j = 0; j < na; ++j) {
          const std::int64_t id = grid.index(i, j);
          const double c = u[id];
          const double dp0 = (u[grid.index(i + 1, j)] - c) / grid.h;
          const double dm0 = (c - u[grid.index(i - 1, j)]) / grid.h;
          const double dp1 = (u[grid.index(i, j + 1)] - c) / grid.h;
          const double dm1 = (c - u[grid.index(i, j - 1)]) / grid.h;
          davg[0] = 0.5 * (dp0 + dm0);
          davg[1] = 0.5 * (dp1 + dm1);
          x[0] = grid.h * i;
          x[1] = grid.h * j;
          const double hnum = model.value(x, davg, c) - 0.5 * s.sigma[0] * (dp0 - dm0) -
                              0.5 * s.sigma[1] * (dp1 - dm1);
          unew[id] = c - s.dtau * hnum;
          update = std::max(update, std::abs(s.dtau * hnum));
        }
    }
    u.swap(unew);
    if ((it + 1) % 100 == 0) {
      st.monotone_violation = std::max(st.monotone_violation, (u - snapshot).maxCoeff());
      snapshot = u;
    }
  }
  st.iterations = it;
  st.final_update = update;
  if (update > tol) throw SolverError("solve_hj: no convergence; last update " +
                                      std::to_string(update) + " > tol");

  GridFunction gf;
  gf.grid = grid;
  gf.values = std::move(u);
  gf.kind = SolutionKind::UMinus;
  gf.lipschitz_bound = s.p_box;
  gf.residual_norm = hj_residual_on_characteristics(model, gf);
  if (stats) *stats = st;
  return gf;
}

double hj_residual_on_characteristics(const HamiltonianModel& model, const GridFunction& gf,
                                      std::int64_t max_samples) {
  const HamiltonianModel work =
      gf.kind == SolutionKind::UPlus ? model.mirrored() : model;
  // For u+ evaluate the mirrored problem on -u+, whose residual equals
  // |H(x, Du+, u+)| pointwise.
  GridFunction base = gf;
  if (gf.kind == SolutionKind::UPlus) base.values = -gf.values;

  const OneSidedGradients g = one_sided_gradients(base);
  const Grid& gr = base.grid;
  const std::int64_t m = gr.node_count();
  const std::int64_t stride =
      max_samples > 0 && max_samples < m ? (m + max_samples - 1) / max_samples : 1;
  const double kink_tol = 2.0 * gr.h * gf.lipschitz_bound;

  double worst = 0.0;
  VecN du(gr.dim);
  for (std::int64_t i = 0; i < m; i += stride) {
    bool differentiable = true;
    for (int a = 0; a < gr.dim; ++a) {
      if (std::abs(g.forward[a][i] - g.backward[a][i]) > kink_tol) differentiable = false;
      du[a] = 0.5 * (g.forward[a][i] + g.backward[a][i]);
    }
    if (!differentiable) continue;
    worst = std::max(worst, std::abs(work.value(gr.node(i), du, base.values[i])));
  }
  return worst;
}

}  // namespace contactdyn
