#pragma once

#include <array>
#include <string>
#include <vector>

#include "contactdyn/torus.hpp"
#include "contactdyn/types.hpp"

namespace contactdyn {

/// One term a*cos(<k,x>) + b*sin(<k,x>) of a trigonometric polynomial.
struct TrigTerm {
  std::array<int, kMaxDim> freq{};  // integer frequency vector, entries beyond dim ignored
  double cos_amp = 0.0;
  double sin_amp = 0.0;
};

/// Finite trigonometric polynomial V on T^n with analytic derivatives.
class Potential {
 public:
  Potential() = default;
  Potential(int dim, std::vector<TrigTerm> terms);

  int dim() const { return dim_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool is_constant() const;

  double value(const VecN& x) const;
  VecN grad(const VecN& x) const;
  MatN hess(const VecN& x) const;

  /// Global minimum over the torus: dense scan plus Newton polish.
  double min_value() const;

  std::string to_string() const;

 private:
  int dim_ = 1;
  std::vector<TrigTerm> terms_;
};

inline Potential constant_potential(int dim, double c) {
  return Potential(dim, {TrigTerm{{0, 0}, c, 0.0}});
}

enum class Family { Mechanical, Discounted, QuadraticTest };
enum class MonotoneSign { Minus, Plus };

std::string to_string(Family f);
std::string to_string(MonotoneSign s);

/// A monotone contact Hamiltonian from the parametric registry
///
///   H(x,p,u) = kinetic_scale * |p - kinetic_shift|^2 / 2 + V(x) + s * lambda * u,
///
/// with s = +1 under (M-) and s = -1 under (M+). Mechanical and Discounted
/// use kinetic_shift = 0; Discounted additionally fixes (M-) and constrains
/// nothing else (it is the H = lambda*u + h(x,p) form with mechanical h).
/// QuadraticTest requires a constant potential and admits a kinetic shift,
/// which breaks (H3) on purpose (used to exercise the convex minimizer).
/// All derivative callbacks are analytic. Immutable after construction.
class HamiltonianModel {
 public:
  struct Params {
    Family family = Family::Mechanical;
    int dim = 1;
    double lambda = 1.0;
    MonotoneSign sign = MonotoneSign::Minus;
    Potential potential;
    double kinetic_scale = 1.0;
    VecN kinetic_shift;  // empty means zero
  };

  explicit HamiltonianModel(Params params);

  /// Construction without invariant validation. Exists so that the assumption
  /// checker can be pointed at deliberately broken parameter sets.
  static HamiltonianModel make_unchecked(Params params);

  Family family() const { return params_.family; }
  int dim() const { return params_.dim; }
  double lambda() const { return params_.lambda; }
  MonotoneSign sign() const { return params_.sign; }
  const Potential& potential() const { return params_.potential; }
  double kinetic_scale() const { return params_.kinetic_scale; }
  const VecN& kinetic_shift() const { return shift_; }

  /// +1 for (M-), -1 for (M+).
  double sign_factor() const { return params_.sign == MonotoneSign::Minus ? 1.0 : -1.0; }

  double value(const VecN& x, const VecN& p, double u) const;
  VecN grad_x(const VecN& x, const VecN& p, double u) const;
  VecN grad_p(const VecN& x, const VecN& p, double u) const;
  double grad_u(const VecN& x, const VecN& p, double u) const;
  MatN hess_pp(const VecN& x, const VecN& p, double u) const;
  MatN hess_xx(const VecN& x, const VecN& p, double u) const;
  // Remaining second derivatives vanish identically for the registry families.
  MatN hess_xp(const VecN&, const VecN&, double) const { return MatN::Zero(dim(), dim()); }
  VecN hess_pu(const VecN&, const VecN&, double) const { return VecN::Zero(dim()); }
  VecN hess_xu(const VecN&, const VecN&, double) const { return VecN::Zero(dim()); }
  double hess_uu(const VecN&, const VecN&, double) const { return 0.0; }

  /// The sign-transformed Hamiltonian Hm(x,p,u) = H(x,-p,-u). Swaps (M-)/(M+).
  HamiltonianModel mirrored() const;

  std::string describe() const;

 private:
  HamiltonianModel(Params params, bool validate);

  Params params_;
  VecN shift_;  // always dim-sized
};

/// H evaluated at a phase point. Pure; rejects non-finite input.
double eval_hamiltonian(const HamiltonianModel& model, const PhasePoint& z);

/// Tangent vector (xdot, pdot, udot) of the contact Hamiltonian vector field.
struct Tangent {
  VecN dx;
  VecN dp;
  double du = 0.0;

  double norm() const { return std::sqrt(dx.squaredNorm() + dp.squaredNorm() + du * du); }
};

/// X_H(z) = (dH/dp, -dH/dx - (dH/du) p, <dH/dp, p> - H).
Tangent eval_vector_field(const HamiltonianModel& model, const PhasePoint& z);

/// Same field on a packed state (x unwrapped is fine; H is periodic).
VecZ eval_vector_field_packed(const HamiltonianModel& model, const VecZ& z);

/// Jacobian of the packed vector field at a packed state.
MatZ vector_field_jacobian(const HamiltonianModel& model, const VecZ& z);

/// The classic example H = lambda*u + p^2/2 + cos(x) on T^1.
HamiltonianModel pendulum_model(double lambda = 1.0);

/// Separable two-degree-of-freedom variant, V = cos(x1) + cos(x2).
HamiltonianModel torus2_model(double lambda = 1.0);

/// QuadraticTest with V identically c.
HamiltonianModel quadratic_model(double lambda, double c, int dim = 1,
                                 MonotoneSign sign = MonotoneSign::Minus);

}  // namespace contactdyn
