#pragma once

#include <optional>
#include <string>
#include <vector>

#include "contactdyn/model.hpp"

namespace contactdyn {

/// Rectangular sampling region for pointwise assumption checks:
/// x over the whole torus, |p_i| <= p_radius, u in [u_min, u_max].
struct SampleBox {
  double p_radius = 3.0;
  double u_min = -3.0;
  double u_max = 3.0;
  int points_per_axis = 8;  // >= 8
};

enum class VerdictStatus { VerifiedOnSample, Violated, NotApplicable };

struct Verdict {
  VerdictStatus status = VerdictStatus::NotApplicable;
  std::optional<PhasePoint> witness;
  double offending_value = 0.0;
  std::string note;

  bool verified() const { return status == VerdictStatus::VerifiedOnSample; }
};

struct CoercivityEntry {
  double e = 0.0;
  double u_bound = 0.0;
  double radius = 0.0;  // P(e, U)
};

/// Sampled verdicts for (H1)-(H4) and the declared (M-)/(M+), plus the
/// coercivity radius table P(e, U). (H4) needs the equilibrium set and is
/// reported not-applicable here; the structure module settles it.
struct AssumptionReport {
  Verdict h1, h2, h3, h4, monotone;
  SampleBox box;
  std::vector<CoercivityEntry> coercivity;

  bool all_verified() const {
    return h1.verified() && h2.verified() && h3.verified() && monotone.verified();
  }
};

/// Closed-form coercivity radius for the registry families: the smallest r
/// with H(x, p, u) > e whenever |p| > r, uniformly over x and over the
/// admissible u side (u >= U under (M-), u <= U under (M+)).
double coercivity_radius(const HamiltonianModel& model, double e, double u_bound);

AssumptionReport check_assumptions(const HamiltonianModel& model, const SampleBox& box,
                                   const std::vector<std::pair<double, double>>& coercivity_requests = {});

/// The unique minimizer P*(x, u) of p -> H(x, p, u), by damped Newton on
/// dH/dp = 0. Residual |dH/dp| <= 1e-10 on success.
VecN p_star(const HamiltonianModel& model, const TorusPoint& x, double u);

}  // namespace contactdyn
