#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "contactdyn/types.hpp"

namespace contactdyn::detail {

// Dormand-Prince 5(4) embedded pair with the Shampine 4th-order continuous
// extension and a PI step-size controller. State is any Eigen column vector.

template <class State>
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;  // signed
  std::array<State, 5> cont;

  State eval(double t) const {
    const double theta = (t - t0) / h;
    const double om = 1.0 - theta;
    return cont[0] + theta * (cont[1] + om * (cont[2] + theta * (cont[3] + om * cont[4])));
  }
};

struct StepControl {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double max_step = std::numeric_limits<double>::infinity();
  double underflow_step = 0.0;  // |h| below this reports underflow
};

enum class RunStatus { ReachedEnd, StoppedByCallback, StepUnderflow };

// Butcher tableau.
inline constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kA21 = 1.0 / 5;
inline constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
inline constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
inline constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                        kA54 = -212.0 / 729;
inline constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                        kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
inline constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                        kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
inline constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                        kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;
inline constexpr double kD1 = -12715105075.0 / 11282082432.0, kD3 = 87487479700.0 / 32700410799.0,
                        kD4 = -10690763975.0 / 1880347072.0, kD5 = 701980252875.0 / 199316789632.0,
                        kD6 = -1453857185.0 / 822651844.0, kD7 = 69997945.0 / 29380423.0;

template <class State, class Rhs>
double initial_step(const Rhs& rhs, double t0, const State& y0, const State& f0, double dir,
                    const StepControl& ctl) {
  const auto sc = (ctl.abs_tol + ctl.rel_tol * y0.array().abs()).matrix().eval();
  const double d0 = (y0.array() / sc.array()).matrix().norm() / std::sqrt(double(y0.size()));
  const double d1 = (f0.array() / sc.array()).matrix().norm() / std::sqrt(double(y0.size()));
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, ctl.max_step);
  State y1 = y0 + dir * h0 * f0;
  State f1(y0.size());
  rhs(t0 + dir * h0, y1, f1);
  const double d2 =
      ((f1 - f0).array() / sc.array()).matrix().norm() / std::sqrt(double(y0.size())) / h0;
  const double dmax = std::max(d1, d2);
  double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return dir * std::min({100.0 * h0, h1, ctl.max_step});
}

/// Integrates dy/dt = rhs(t, y) from t0 to t_end (either direction). After
/// every accepted step calls on_step(t_new, y_new, f_new, segment); a false
/// return stops the run. rhs signature: void(double t, const State&, State&).
template <class State, class Rhs, class OnStep>
RunStatus integrate_adaptive(const Rhs& rhs, double t0, double t_end, State y,
                             const StepControl& ctl, const OnStep& on_step) {
  const double dir = t_end >= t0 ? 1.0 : -1.0;
  const Eigen::Index n = y.size();
  State f0(n), f1(n), k2(n), k3(n), k4(n), k5(n), k6(n), ytmp(n), y1(n), err(n);
  rhs(t0, y, f0);

  double t = t0;
  double h = initial_step(rhs, t0, y, f0, dir, ctl);
  if (h == 0.0 || !std::isfinite(h)) h = dir * 1e-6;
  double err_prev = 1e-4;
  bool rejected = false;

  while (dir * (t_end - t) > 0.0) {
    if (std::abs(h) > ctl.max_step) h = dir * ctl.max_step;
    if (dir * (t + h - t_end) > 0.0) h = t_end - t;
    if (std::abs(h) < ctl.underflow_step || t + h == t) return RunStatus::StepUnderflow;

    ytmp = y + h * (kA21 * f0);
    rhs(t + kC[1] * h, ytmp, k2);
    ytmp = y + h * (kA31 * f0 + kA32 * k2);
    rhs(t + kC[2] * h, ytmp, k3);
    ytmp = y + h * (kA41 * f0 + kA42 * k2 + kA43 * k3);
    rhs(t + kC[3] * h, ytmp, k4);
    ytmp = y + h * (kA51 * f0 + kA52 * k2 + kA53 * k3 + kA54 * k4);
    rhs(t + kC[4] * h, ytmp, k5);
    ytmp = y + h * (kA61 * f0 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5);
    rhs(t + h, ytmp, k6);
    y1 = y + h * (kB1 * f0 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    rhs(t + h, y1, f1);  // FSAL

    err = h * (kE1 * f0 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * f1);
    double err_norm = 0.0;
    bool finite = y1.allFinite();
    if (finite) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double sc = ctl.abs_tol + ctl.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
        const double q = err[i] / sc;
        err_norm += q * q;
      }
      err_norm = std::sqrt(err_norm / double(n));
    } else {
      err_norm = 1e10;
    }

    if (err_norm <= 1.0) {
      DenseSegment<State> seg;
      seg.t0 = t;
      seg.h = h;
      seg.cont[0] = y;
      seg.cont[1] = y1 - y;
      seg.cont[2] = h * f0 - seg.cont[1];
      seg.cont[3] = seg.cont[1] - h * f1 - seg.cont[2];
      seg.cont[4] = h * (kD1 * f0 + kD3 * k3 + kD4 * k4 + kD5 * k5 + kD6 * k6 + kD7 * f1);

      t += h;
      y.swap(y1);
      f0.swap(f1);

      if (!on_step(t, y, f0, seg)) return RunStatus::StoppedByCallback;

      const double e = std::max(err_norm, 1e-10);
      double fac = 0.9 * std::pow(e, -0.17) * std::pow(err_prev, 0.04);
      fac = std::clamp(fac, 0.2, rejected ? 1.0 : 10.0);
      h *= fac;
      err_prev = e;
      rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      rejected = true;
    }
  }
  return RunStatus::ReachedEnd;
}

}  // namespace contactdyn::detail
