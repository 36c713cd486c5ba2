#include "contactdyn/assumptions.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace contactdyn {

double coercivity_radius(const HamiltonianModel& model, double e, double u_bound) {
  // H >= ks*|p - b|^2/2 + min V + s*lambda*U on the admissible u side,
  // so |p| > |b| + sqrt(2*(e - min V - s*lambda*U)/ks) forces H > e.
  const double vmin = model.potential().min_value();
  const double s_term = model.sign_factor() * model.lambda() * u_bound;
  const double gap = e - vmin - s_term;
  const double core = gap > 0.0 ? std::sqrt(2.0 * gap / model.kinetic_scale()) : 0.0;
  return model.kinetic_shift().norm() + core;
}

namespace {

std::vector<VecN> ray_directions(int dim) {
  std::vector<VecN> dirs;
  if (dim == 1) {
    dirs.push_back(VecN::Constant(1, 1.0));
    dirs.push_back(VecN::Constant(1, -1.0));
  } else {
    const int m = 16;
    for (int k = 0; k < m; ++k) {
      VecN e(2);
      e << std::cos(kTwoPi * k / m), std::sin(kTwoPi * k / m);
      dirs.push_back(e);
    }
  }
  return dirs;
}

}  // namespace

AssumptionReport check_assumptions(const HamiltonianModel& model, const SampleBox& box,
                                   const std::vector<std::pair<double, double>>& coercivity_requests) {
  if (box.points_per_axis < 8) throw DomainError("sample density must be >= 8 points per axis");
  if (!(box.p_radius > 0.0) || !(box.u_max >= box.u_min))
    throw DomainError("invalid sample box");

  AssumptionReport report;
  report.box = box;
  const int n = model.dim();
  const int m = box.points_per_axis;

  std::vector<VecN> xs, ps;
  std::vector<double> us;
  {
    VecN x(n), p(n);
    if (n == 1) {
      for (int i = 0; i < m; ++i) {
        x[0] = kTwoPi * i / m;
        xs.push_back(x);
        p[0] = -box.p_radius + 2.0 * box.p_radius * i / (m - 1);
        ps.push_back(p);
      }
    } else {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          x[0] = kTwoPi * i / m;
          x[1] = kTwoPi * j / m;
          xs.push_back(x);
          p[0] = -box.p_radius + 2.0 * box.p_radius * i / (m - 1);
          p[1] = -box.p_radius + 2.0 * box.p_radius * j / (m - 1);
          ps.push_back(p);
        }
    }
    for (int i = 0; i < m; ++i) us.push_back(box.u_min + (box.u_max - box.u_min) * i / (m - 1));
  }

  // (H1): smallest eigenvalue of d2H/dp2 positive at every sample point.
  report.h1.status = VerdictStatus::VerifiedOnSample;
  for (const auto& x : xs) {
    for (const auto& p : ps) {
      for (double u : us) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.hess_pp(x, p, u));
        const double ev = es.eigenvalues().minCoeff();
        if (!(ev > 0.0)) {
          report.h1.status = VerdictStatus::Violated;
          report.h1.witness = PhasePoint(TorusPoint(x), p, u);
          report.h1.offending_value = ev;
          report.h1.note = "d2H/dp2 not positive definite";
        }
      }
    }
  }

  // (H3): dH/dp vanishes on the zero section.
  report.h3.status = VerdictStatus::VerifiedOnSample;
  for (const auto& x : xs) {
    for (double u : us) {
      const double g = model.grad_p(x, VecN::Zero(n), u).norm();
      if (!(g < 1e-10)) {
        report.h3.status = VerdictStatus::Violated;
        report.h3.witness = PhasePoint(TorusPoint(x), VecN::Zero(n), u);
        report.h3.offending_value = g;
        report.h3.note = "dH/dp(x,0,u) != 0";
      }
    }
  }

  // (M+-): dH/du keeps the declared sign with magnitude >= lambda > 0.
  report.monotone.status = VerdictStatus::VerifiedOnSample;
  if (!(model.lambda() > 0.0)) {
    report.monotone.status = VerdictStatus::Violated;
    report.monotone.witness = PhasePoint(TorusPoint(xs.front()), ps.front(), us.front());
    report.monotone.offending_value =
        model.grad_u(xs.front(), ps.front(), us.front());
    report.monotone.note = "(M+-) needs some lambda > 0; the model declares none";
  }
  const double lb = model.lambda() * (1.0 - 1e-12);
  for (const auto& x : xs) {
    for (const auto& p : ps) {
      for (double u : us) {
        const double hu = model.grad_u(x, p, u);
        const bool ok = model.sign() == MonotoneSign::Minus ? hu >= lb : hu <= -lb;
        if (!ok) {
          report.monotone.status = VerdictStatus::Violated;
          report.monotone.witness = PhasePoint(TorusPoint(x), p, u);
          report.monotone.offending_value = hu;
          report.monotone.note = model.sign() == MonotoneSign::Minus
                                     ? "dH/du < lambda somewhere"
                                     : "dH/du > -lambda somewhere";
        }
      }
    }
  }

  // (H2): radial scan. H(x, r*e, u) must exceed e and increase in r on
  // (P, 4P] for the requested (e, U) pairs, u taken at the admissible edge.
  report.h2.status = VerdictStatus::VerifiedOnSample;
  std::vector<std::pair<double, double>> requests = coercivity_requests;
  if (requests.empty())
    requests.push_back({0.0, model.sign() == MonotoneSign::Minus ? box.u_min : box.u_max});
  const auto dirs = ray_directions(n);
  for (const auto& [e_level, u_bound] : requests) {
    const double radius = coercivity_radius(model, e_level, u_bound);
    report.coercivity.push_back({e_level, u_bound, radius});
    const double r_lo = std::max(radius, 1e-6);
    for (const auto& x : xs) {
      for (const auto& e_dir : dirs) {
        double prev = -std::numeric_limits<double>::infinity();
        for (int k = 1; k <= 32; ++k) {
          const double r = r_lo + (4.0 * std::max(radius, 1e-6) - r_lo) * k / 32.0;
          const double hv = model.value(x, r * e_dir, u_bound);
          if (!(hv > e_level) || !(hv >= prev)) {
            report.h2.status = VerdictStatus::Violated;
            report.h2.witness = PhasePoint(TorusPoint(x), r * e_dir, u_bound);
            report.h2.offending_value = hv;
            report.h2.note = "H not increasing past P(e,U) along a sampled ray";
          }
          prev = hv;
        }
      }
    }
  }

  report.h4.status = VerdictStatus::NotApplicable;
  report.h4.note = "needs the equilibrium set; settled by the structure module";
  return report;
}

VecN p_star(const HamiltonianModel& model, const TorusPoint& x, double u) {
  const int n = model.dim();
  VecN p = VecN::Zero(n);
  double res = model.grad_p(x.coords, p, u).norm();
  for (int it = 0; it < 100 && res > 1e-10; ++it) {
    const VecN g = model.grad_p(x.coords, p, u);
    Eigen::LLT<Eigen::MatrixXd> llt(model.hess_pp(x.coords, p, u));
    if (llt.info() != Eigen::Success)
      throw SolverError("p_star: d2H/dp2 not positive definite at iterate");
    const Eigen::VectorXd step = llt.solve(g);
    // Backtrack on the residual norm.
    double alpha = 1.0;
    for (int bt = 0; bt < 30; ++bt) {
      const VecN trial = p - alpha * VecN(step);
      const double tres = model.grad_p(x.coords, trial, u).norm();
      if (tres < res) {
        p = trial;
        res = tres;
        break;
      }
      alpha *= 0.5;
      if (bt == 29) throw SolverError("p_star: Newton step failed to reduce the residual");
    }
  }
  if (!(res <= 1e-10))
    throw SolverError("p_star: no convergence to |dH/dp| <= 1e-10 in 100 iterations");
  return p;
}

}  // namespace contactdyn
