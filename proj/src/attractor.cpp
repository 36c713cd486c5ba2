#include "contactdyn/attractor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <thread>

#include "contactdyn/assumptions.hpp"

namespace contactdyn {

namespace {

/// Uniform double in [0, 1) from the top 53 bits; keeps sampling
/// reproducible independent of the standard library's distributions.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

TrappingSpec make_trapping_spec(const HamiltonianModel& model, GridFunction uref, double delta) {
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  const bool minus = model.sign() == MonotoneSign::Minus;
  if (minus != (uref.kind == SolutionKind::UMinus))
    throw ContractError("grid solution kind does not match the model's monotone sign");
  TrappingSpec spec;
  spec.delta = delta;
  spec.e_bound = delta;
  spec.u_bound = minus ? uref.values.minCoeff() : uref.values.maxCoeff();
  // Members have H <= delta and u on the admissible side of u_bound -+ delta.
  spec.coercivity_radius =
      coercivity_radius(model, delta, minus ? spec.u_bound - delta : spec.u_bound + delta);
  spec.uref = std::move(uref);
  return spec;
}

double lyapunov_f(const TrappingSpec& spec, const PhasePoint& z) {
  const double ux = interpolate(spec.uref, z.x.coords);
  return spec.uref.kind == SolutionKind::UMinus ? ux - z.u : z.u - ux;
}

Membership membership(const TrappingSpec& spec, const HamiltonianModel& model,
                      const PhasePoint& z) {
  if (spec.uref.values.size() == 0) throw ContractError("trapping spec carries no grid solution");
  const double h = eval_hamiltonian(model, z);
  const double f = lyapunov_f(spec, z);
  if (std::abs(h) <= 1e-9 && f <= spec.grid_slack()) return Membership::InY;
  if (h < spec.delta && f < spec.delta) return Membership::InYDelta;
  return Membership::Outside;
}

std::vector<PhasePoint> sample_trapping_set(const TrappingSpec& spec,
                                            const HamiltonianModel& model, std::int64_t n,
                                            std::uint64_t seed) {
  const int dim = model.dim();
  const bool minus = model.sign() == MonotoneSign::Minus;
  const double u_other =
      minus ? spec.uref.values.maxCoeff() + spec.delta : spec.uref.values.minCoeff() - spec.delta;
  const double u_edge = minus ? spec.u_bound - spec.delta : spec.u_bound + spec.delta;
  const double u_lo = std::min(u_edge, u_other);
  const double u_hi = std::max(u_edge, u_other);
  const double r = spec.coercivity_radius;

  std::mt19937_64 rng(seed);
  std::vector<PhasePoint> out;
  out.reserve(static_cast<std::size_t>(n));
  std::int64_t attempts = 0;
  while (static_cast<std::int64_t>(out.size()) < n) {
    ++attempts;
    if (attempts >= 10000 && out.size() < static_cast<std::size_t>(attempts) / 10000)
      throw SolverError("sample_trapping_set: acceptance rate below 1e-4");
    VecN x(dim), p(dim);
    for (int a = 0; a < dim; ++a) x[a] = kTwoPi * uniform01(rng);
    for (int a = 0; a < dim; ++a) p[a] = r * (2.0 * uniform01(rng) - 1.0);
    const double u = u_lo + (u_hi - u_lo) * uniform01(rng);
    if (p.norm() > r) continue;
    PhasePoint z(TorusPoint(x), p, u);
    if (membership(spec, model, z) == Membership::Outside) continue;
    if (std::abs(eval_hamiltonian(model, z)) >= spec.delta) continue;  // two-sided energy band
    out.push_back(std::move(z));
  }
  return out;
}

AttractorApprox approximate_attractor(const HamiltonianModel& model, const TrappingSpec& spec,
                                      double t_horizon, std::int64_t n, std::uint64_t seed,
                                      const IntegratorConfig& cfg, int threads) {
  if (!(t_horizon > 0.0)) throw DomainError("t_horizon must be positive");
  const auto samples = sample_trapping_set(spec, model, n, seed);

  IntegratorConfig run = cfg;
  run.t_final = t_horizon;
  run.direction = model.sign() == MonotoneSign::Minus ? Direction::Forward : Direction::Backward;

  AttractorApprox out;
  out.t_horizon = t_horizon;
  out.delta = spec.delta;
  out.n_samples = n;
  out.seed = seed;
  out.points.resize(samples.size());
  out.h_diag.resize(samples.size());
  out.f_diag.resize(samples.size());

  std::atomic<bool> blew_up{false};
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end && !blew_up.load(); ++i) {
      const Trajectory traj = integrate(model, samples[i], run);
      if (traj.termination == Termination::BlowUp) {
        blew_up.store(true);
        return;
      }
      out.points[i] = traj.points.back();
      out.h_diag[i] = eval_hamiltonian(model, out.points[i]);
      out.f_diag[i] = lyapunov_f(spec, out.points[i]);
    }
  };
  if (threads <= 1 || samples.size() < 2) {
    work(0, samples.size());
  } else {
    const std::size_t nt = std::min<std::size_t>(threads, samples.size());
    std::vector<std::thread> pool;
    const std::size_t chunk = (samples.size() + nt - 1) / nt;
    for (std::size_t k = 0; k < nt; ++k)
      pool.emplace_back(work, k * chunk, std::min(samples.size(), (k + 1) * chunk));
    for (auto& th : pool) th.join();
  }
  if (blew_up.load())
    throw ContractError(
        "approximate_attractor: a trapping-set orbit blew up; forward images of the trapping "
        "set are compact, so this indicates a bug");

  const double h_cap = std::exp(-model.lambda() * t_horizon) * spec.delta * (1.0 + 1e-6);
  const double f_cap = std::exp(-model.lambda() * t_horizon) * spec.delta + spec.grid_slack();
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (std::abs(out.h_diag[i]) > h_cap)
      throw ContractError("attractor cloud violates the exponential |H| bound");
    if (out.f_diag[i] > f_cap)
      throw ContractError("attractor cloud violates the exponential F bound");
  }
  return out;
}

HausdorffReport hausdorff(const std::vector<PhasePoint>& a, const std::vector<PhasePoint>& b) {
  auto directed = [](const std::vector<PhasePoint>& from, const std::vector<PhasePoint>& to) {
    double worst = 0.0;
    for (const auto& z : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& w : to) best = std::min(best, phase_distance(z, w));
      worst = std::max(worst, best);
    }
    return worst;
  };
  HausdorffReport r;
  r.d_ab = directed(a, b);
  r.d_ba = directed(b, a);
  return r;
}

GraphPropertyVerdict graph_property_check(const AttractorApprox& approx) {
  GraphPropertyVerdict v;
  const auto& pts = approx.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dxp = std::sqrt(torus_diff(pts[i].x.coords, pts[j].x.coords).squaredNorm() +
                                   (pts[i].p - pts[j].p).squaredNorm());
      if (dxp <= 1e-6 && std::abs(pts[i].u - pts[j].u) > 1e-4) {
        v.injective = false;
        v.witness = {pts[i], pts[j]};
        return v;
      }
    }
  }
  return v;
}

RetractionVerdict retraction_probe(const HamiltonianModel& model, const TrappingSpec& spec,
                                   std::int64_t samples, std::uint64_t seed, int t_steps) {
  const auto zs = sample_trapping_set(spec, model, samples, seed);

  RetractionVerdict v;
  v.max_h_excess = -std::numeric_limits<double>::infinity();
  v.max_f_excess = -std::numeric_limits<double>::infinity();
  const double tol = 1e-9;

  auto probe = [&](const PhasePoint& g, const PhasePoint& z0, double t) {
    const double h = eval_hamiltonian(model, g);
    const double f = lyapunov_f(spec, g);
    v.max_h_excess = std::max(v.max_h_excess, h - spec.delta);
    v.max_f_excess = std::max(v.max_f_excess, f - spec.delta);
    if (h > spec.delta + tol || f > spec.delta + tol) {
      if (v.contained) {
        v.contained = false;
        v.witness = z0;
        v.witness_t = t;
      }
    }
  };

  for (const auto& z : zs) {
    const double u_target = interpolate(spec.uref, z.x.coords);  // u-(x) resp. u+(x)
    for (int k = 0; k < t_steps; ++k) {
      const double t = t_steps == 1 ? 0.0 : static_cast<double>(k) / (t_steps - 1);
      PhasePoint g;
      if (t <= 0.5) {
        // Stage 1: straight line in p toward P*(x, u), u fixed.
        const double s = 2.0 * t;
        const VecN pstar = p_star(model, z.x, z.u);
        g = PhasePoint(z.x, (1.0 - s) * z.p + s * pstar, z.u);
      } else {
        // Stage 2: slide u to the grid solution, p following P*.
        const double s = 2.0 * t - 1.0;
        const double us = (1.0 - s) * z.u + s * u_target;
        g = PhasePoint(z.x, p_star(model, z.x, us), us);
      }
      probe(g, z, t);
    }
  }
  return v;
}

int single_linkage_cluster_count(const std::vector<PhasePoint>& cloud, double scale) {
  const std::size_t m = cloud.size();
  if (m == 0) return 0;
  if (m == 1) return 1;

  std::vector<double> nn(m, std::numeric_limits<double>::infinity());
  std::vector<std::vector<double>> dist(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = phase_distance(cloud[i], cloud[j]);
      dist[i][j] = dist[j][i] = d;
      nn[i] = std::min(nn[i], d);
      nn[j] = std::min(nn[j], d);
    }
  const double mean_nn = std::accumulate(nn.begin(), nn.end(), 0.0) / static_cast<double>(m);
  const double threshold = scale * mean_nn;

  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (dist[i][j] <= threshold) parent[find(i)] = find(j);

  int count = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (find(i) == i) ++count;
  return count;
}

}  // namespace contactdyn
