#pragma once

#include <cmath>

#include "contactdyn/types.hpp"

namespace contactdyn {

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

/// Canonical representative of an angle in [0, 2*pi).
inline double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  // fmod can round back up to 2*pi for tiny negative inputs.
  if (w >= kTwoPi) w = 0.0;
  return w;
}

inline VecN wrap_angles(VecN x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = wrap_angle(x[i]);
  return x;
}

/// Signed representative of an angle difference in [-pi, pi).
inline double wrap_angle_diff(double d) {
  double w = std::fmod(d + kTwoPi / 2.0, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w - kTwoPi / 2.0;
}

/// A point on the flat torus T^n, coordinates stored wrapped to [0, 2*pi).
struct TorusPoint {
  VecN coords;

  TorusPoint() = default;
  explicit TorusPoint(VecN c) : coords(wrap_angles(std::move(c))) {}

  int dim() const { return static_cast<int>(coords.size()); }
};

inline TorusPoint torus_point(std::initializer_list<double> c) {
  VecN v(static_cast<Eigen::Index>(c.size()));
  Eigen::Index i = 0;
  for (double a : c) v[i++] = a;
  return TorusPoint(v);
}

/// Componentwise shortest angle difference a - b, each entry in [-pi, pi).
inline VecN torus_diff(const VecN& a, const VecN& b) {
  VecN d(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) d[i] = wrap_angle_diff(a[i] - b[i]);
  return d;
}

/// Flat periodic metric; bounded by pi*sqrt(n).
inline double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  return torus_diff(a.coords, b.coords).norm();
}

/// A point z = (x, p, u) of T^n x R^n x R.
struct PhasePoint {
  TorusPoint x;
  VecN p;
  double u = 0.0;

  PhasePoint() = default;
  PhasePoint(TorusPoint x_, VecN p_, double u_) : x(std::move(x_)), p(std::move(p_)), u(u_) {}

  int dim() const { return x.dim(); }
  bool finite() const { return x.coords.allFinite() && p.allFinite() && std::isfinite(u); }
};

inline PhasePoint phase_point(std::initializer_list<double> x, std::initializer_list<double> p,
                              double u) {
  VecN pv(static_cast<Eigen::Index>(p.size()));
  Eigen::Index i = 0;
  for (double a : p) pv[i++] = a;
  return PhasePoint(torus_point(x), pv, u);
}

/// Product metric: torus metric on x, Euclidean on p and u.
inline double phase_distance(const PhasePoint& a, const PhasePoint& b) {
  const double dx2 = torus_diff(a.x.coords, b.x.coords).squaredNorm();
  const double dp2 = (a.p - b.p).squaredNorm();
  const double du = a.u - b.u;
  return std::sqrt(dx2 + dp2 + du * du);
}

/// Flatten to (x, p, u); x kept as given (callers may hold an unwrapped lift).
inline VecZ pack_state(const VecN& x, const VecN& p, double u) {
  const Eigen::Index n = x.size();
  VecZ z(2 * n + 1);
  z.head(n) = x;
  z.segment(n, n) = p;
  z[2 * n] = u;
  return z;
}

inline VecZ pack_state(const PhasePoint& z) { return pack_state(z.x.coords, z.p, z.u); }

inline PhasePoint unpack_state(const VecZ& z) {
  const Eigen::Index n = (z.size() - 1) / 2;
  return PhasePoint(TorusPoint(z.head(n)), z.segment(n, n), z[2 * n]);
}

}  // namespace contactdyn
