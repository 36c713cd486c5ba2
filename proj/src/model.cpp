#include "contactdyn/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace contactdyn {

Potential::Potential(int dim, std::vector<TrigTerm> terms) : dim_(dim), terms_(std::move(terms)) {
  if (dim_ < 1 || dim_ > kMaxDim) throw DomainError("potential dimension must be 1 or 2");
  for (const auto& t : terms_) {
    if (!std::isfinite(t.cos_amp) || !std::isfinite(t.sin_amp))
      throw DomainError("potential amplitudes must be finite");
  }
}

bool Potential::is_constant() const {
  for (const auto& t : terms_) {
    bool zero_freq = true;
    for (int i = 0; i < dim_; ++i) zero_freq = zero_freq && t.freq[i] == 0;
    if (!zero_freq && (t.cos_amp != 0.0 || t.sin_amp != 0.0)) return false;
  }
  return true;
}

double Potential::value(const VecN& x) const {
  double v = 0.0;
  for (const auto& t : terms_) {
    double phase = 0.0;
    for (int i = 0; i < dim_; ++i) phase += t.freq[i] * x[i];
    v += t.cos_amp * std::cos(phase) + t.sin_amp * std::sin(phase);
  }
  return v;
}

VecN Potential::grad(const VecN& x) const {
  VecN g = VecN::Zero(dim_);
  for (const auto& t : terms_) {
    double phase = 0.0;
    for (int i = 0; i < dim_; ++i) phase += t.freq[i] * x[i];
    const double d = -t.cos_amp * std::sin(phase) + t.sin_amp * std::cos(phase);
    for (int i = 0; i < dim_; ++i) g[i] += t.freq[i] * d;
  }
  return g;
}

MatN Potential::hess(const VecN& x) const {
  MatN h = MatN::Zero(dim_, dim_);
  for (const auto& t : terms_) {
    double phase = 0.0;
    for (int i = 0; i < dim_; ++i) phase += t.freq[i] * x[i];
    const double d2 = -t.cos_amp * std::cos(phase) - t.sin_amp * std::sin(phase);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) h(i, j) += t.freq[i] * t.freq[j] * d2;
  }
  return h;
}

double Potential::min_value() const {
  const int scan = dim_ == 1 ? 4096 : 256;
  const double h = kTwoPi / scan;
  double best = value(VecN::Zero(dim_));
  VecN best_x = VecN::Zero(dim_);
  VecN x(dim_);
  if (dim_ == 1) {
    for (int i = 0; i < scan; ++i) {
      x[0] = i * h;
      const double v = value(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
  } else {
    for (int i = 0; i < scan; ++i)
      for (int j = 0; j < scan; ++j) {
        x[0] = i * h;
        x[1] = j * h;
        const double v = value(x);
        if (v < best) {
          best = v;
          best_x = x;
        }
      }
  }
  // Newton polish from the best scan point.
  x = best_x;
  for (int it = 0; it < 40; ++it) {
    const VecN g = grad(x);
    if (g.norm() < 1e-14) break;
    MatN hm = hess(x);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(hm);
    if (!lu.isInvertible()) break;
    const Eigen::VectorXd step = lu.solve(g);
    const VecN xn = x - VecN(step);
    if (value(xn) > value(x)) break;  // polish only while descending
    x = xn;
  }
  return std::min(best, value(x));
}

std::string Potential::to_string() const {
  std::ostringstream os;
  bool first = true;
  auto emit = [&](double amp, const char* fn, const std::array<int, kMaxDim>& k) {
    if (amp == 0.0) return;
    if (!first) os << " + ";
    first = false;
    os << amp << "*" << fn << "(" << k[0];
    if (dim_ == 2) os << "," << k[1];
    os << ")";
  };
  for (const auto& t : terms_) {
    bool zero_freq = true;
    for (int i = 0; i < dim_; ++i) zero_freq = zero_freq && t.freq[i] == 0;
    if (zero_freq) {
      if (t.cos_amp != 0.0) {
        if (!first) os << " + ";
        first = false;
        os << t.cos_amp;
      }
      continue;
    }
    emit(t.cos_amp, "cos", t.freq);
    emit(t.sin_amp, "sin", t.freq);
  }
  if (first) os << "0";
  return os.str();
}

std::string to_string(Family f) {
  switch (f) {
    case Family::Mechanical: return "Mechanical";
    case Family::Discounted: return "Discounted";
    case Family::QuadraticTest: return "QuadraticTest";
  }
  return "?";
}

std::string to_string(MonotoneSign s) { return s == MonotoneSign::Minus ? "Minus" : "Plus"; }

HamiltonianModel::HamiltonianModel(Params params) : HamiltonianModel(std::move(params), true) {}

HamiltonianModel HamiltonianModel::make_unchecked(Params params) {
  return HamiltonianModel(std::move(params), false);
}

HamiltonianModel::HamiltonianModel(Params params, bool validate) : params_(std::move(params)) {
  const int n = params_.dim;
  if (n < 1 || n > kMaxDim) throw DomainError("model dimension must be 1 or 2");
  if (params_.potential.terms().empty())
    params_.potential = constant_potential(n, 0.0);
  shift_ = params_.kinetic_shift.size() == 0 ? VecN::Zero(n) : params_.kinetic_shift;
  if (shift_.size() != n) throw DomainError("kinetic_shift dimension mismatch");
  if (params_.potential.dim() != n) throw DomainError("potential dimension mismatch");
  if (!validate) return;

  if (!(params_.lambda > 0.0) || !std::isfinite(params_.lambda))
    throw DomainError("lambda must be a positive real");
  if (!(params_.kinetic_scale > 0.0) || !std::isfinite(params_.kinetic_scale))
    throw DomainError("kinetic_scale must be a positive real");
  if (params_.family == Family::Discounted && params_.sign != MonotoneSign::Minus)
    throw DomainError("Discounted family fixes monotone_sign = Minus");
  if (params_.family == Family::QuadraticTest && !params_.potential.is_constant())
    throw DomainError("QuadraticTest requires a constant potential");
  if (params_.family != Family::QuadraticTest && shift_.norm() != 0.0)
    throw DomainError("kinetic_shift is only admitted for QuadraticTest");
}

double HamiltonianModel::value(const VecN& x, const VecN& p, double u) const {
  const VecN q = p - shift_;
  return 0.5 * params_.kinetic_scale * q.squaredNorm() + params_.potential.value(x) +
         sign_factor() * params_.lambda * u;
}

VecN HamiltonianModel::grad_x(const VecN& x, const VecN&, double) const {
  return params_.potential.grad(x);
}

VecN HamiltonianModel::grad_p(const VecN&, const VecN& p, double) const {
  return params_.kinetic_scale * (p - shift_);
}

double HamiltonianModel::grad_u(const VecN&, const VecN&, double) const {
  return sign_factor() * params_.lambda;
}

MatN HamiltonianModel::hess_pp(const VecN&, const VecN&, double) const {
  return params_.kinetic_scale * MatN::Identity(dim(), dim());
}

MatN HamiltonianModel::hess_xx(const VecN& x, const VecN&, double) const {
  return params_.potential.hess(x);
}

HamiltonianModel HamiltonianModel::mirrored() const {
  Params p = params_;
  // H(x,-p,-u): kinetic shift negates, the u-term flips sign.
  p.sign = params_.sign == MonotoneSign::Minus ? MonotoneSign::Plus : MonotoneSign::Minus;
  p.kinetic_shift = -shift_;
  if (p.family == Family::Discounted) p.family = Family::Mechanical;
  return HamiltonianModel(std::move(p));
}

std::string HamiltonianModel::describe() const {
  std::ostringstream os;
  os << to_string(params_.family) << "(n=" << dim() << ", lambda=" << lambda() << ", "
     << to_string(sign()) << ", ks=" << kinetic_scale() << ", V=" << params_.potential.to_string()
     << ")";
  return os.str();
}

namespace {
void require_finite(const PhasePoint& z) {
  if (!z.finite()) throw DomainError("phase point has non-finite components");
}
}  // namespace

double eval_hamiltonian(const HamiltonianModel& model, const PhasePoint& z) {
  require_finite(z);
  return model.value(z.x.coords, z.p, z.u);
}

Tangent eval_vector_field(const HamiltonianModel& model, const PhasePoint& z) {
  require_finite(z);
  const VecN& x = z.x.coords;
  const VecN hp = model.grad_p(x, z.p, z.u);
  Tangent t;
  t.dx = hp;
  t.dp = -model.grad_x(x, z.p, z.u) - model.grad_u(x, z.p, z.u) * z.p;
  t.du = hp.dot(z.p) - model.value(x, z.p, z.u);
  return t;
}

VecZ eval_vector_field_packed(const HamiltonianModel& model, const VecZ& z) {
  const Eigen::Index n = model.dim();
  const VecN x = z.head(n);
  const VecN p = z.segment(n, n);
  const double u = z[2 * n];
  const VecN hp = model.grad_p(x, p, u);
  VecZ f(2 * n + 1);
  f.head(n) = hp;
  f.segment(n, n) = -model.grad_x(x, p, u) - model.grad_u(x, p, u) * p;
  f[2 * n] = hp.dot(p) - model.value(x, p, u);
  return f;
}

MatZ vector_field_jacobian(const HamiltonianModel& model, const VecZ& z) {
  const int n = model.dim();
  const VecN x = z.head(n);
  const VecN p = z.segment(n, n);
  const double u = z[2 * n];

  const VecN hx = model.grad_x(x, p, u);
  const double hu = model.grad_u(x, p, u);
  const MatN hxx = model.hess_xx(x, p, u);
  const MatN hpp = model.hess_pp(x, p, u);
  const MatN hxp = model.hess_xp(x, p, u);  // d2H/dx_i dp_j
  const VecN hpu = model.hess_pu(x, p, u);
  const VecN hxu = model.hess_xu(x, p, u);
  const double huu = model.hess_uu(x, p, u);

  MatZ jac = MatZ::Zero(2 * n + 1, 2 * n + 1);
  // xdot = H_p
  jac.block(0, 0, n, n) = hxp.transpose();
  jac.block(0, n, n, n) = hpp;
  jac.block(0, 2 * n, n, 1) = hpu;
  // pdot = -H_x - H_u p
  jac.block(n, 0, n, n) = -hxx - p * hxu.transpose();
  jac.block(n, n, n, n) = -hxp - p * hpu.transpose() - hu * MatN::Identity(n, n);
  jac.block(n, 2 * n, n, 1) = -hxu - huu * p;
  // udot = <H_p, p> - H
  jac.block(2 * n, 0, 1, n) = (hxp * p - hx).transpose();
  jac.block(2 * n, n, 1, n) = (hpp * p).transpose();
  jac(2 * n, 2 * n) = hpu.dot(p) - hu;
  return jac;
}

HamiltonianModel pendulum_model(double lambda) {
  HamiltonianModel::Params p;
  p.family = Family::Discounted;
  p.dim = 1;
  p.lambda = lambda;
  p.sign = MonotoneSign::Minus;
  p.potential = Potential(1, {TrigTerm{{1, 0}, 1.0, 0.0}});
  return HamiltonianModel(std::move(p));
}

HamiltonianModel torus2_model(double lambda) {
  HamiltonianModel::Params p;
  p.family = Family::Discounted;
  p.dim = 2;
  p.lambda = lambda;
  p.sign = MonotoneSign::Minus;
  p.potential = Potential(2, {TrigTerm{{1, 0}, 1.0, 0.0}, TrigTerm{{0, 1}, 1.0, 0.0}});
  return HamiltonianModel(std::move(p));
}

HamiltonianModel quadratic_model(double lambda, double c, int dim, MonotoneSign sign) {
  HamiltonianModel::Params p;
  p.family = Family::QuadraticTest;
  p.dim = dim;
  p.lambda = lambda;
  p.sign = sign;
  p.potential = constant_potential(dim, c);
  return HamiltonianModel(std::move(p));
}

}  // namespace contactdyn
