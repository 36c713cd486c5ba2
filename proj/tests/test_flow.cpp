#include <doctest.h>

#include <cmath>

#include "contactdyn/flow.hpp"
#include "test_support.hpp"

using namespace contactdyn;
using namespace testsupport;

TEST_SUITE_BEGIN("flow");

namespace {
IntegratorConfig forward_cfg(double t_final) {
  IntegratorConfig cfg;
  cfg.t_final = t_final;
  return cfg;
}
}  // namespace

TEST_CASE("trajectory bookkeeping") {
  const auto pend = pendulum_model(1.0);
  const Trajectory traj = integrate(pend, phase_point({0.0}, {0.0}, 0.0), forward_cfg(2.0));
  REQUIRE(traj.size() >= 3);
  CHECK(traj.times.size() == traj.points.size());
  CHECK(traj.times.size() == traj.h_values.size());
  CHECK(traj.f_values.empty());
  for (std::size_t k = 1; k < traj.size(); ++k) CHECK(traj.times[k] > traj.times[k - 1]);
  CHECK(traj.times.back() == doctest::Approx(2.0));
  CHECK(traj.termination == Termination::ReachedTFinal);
}

TEST_CASE("energy decay closed form for the discounted pendulum") {
  const auto pend = pendulum_model(1.0);
  // H(z0) = 1 at (0, 0, 0).
  const PhasePoint z0 = phase_point({0.0}, {0.0}, 0.0);
  REQUIRE(eval_hamiltonian(pend, z0) == doctest::Approx(1.0));
  const Trajectory traj = integrate(pend, z0, forward_cfg(1.0));
  CHECK(std::abs(traj.h_values.back() - std::exp(-1.0)) <= 1e-8);

  // dH/du is constant, so the residual collapses to |H - e^{-lambda t} H0|.
  CHECK(energy_residual(pend, traj) <= 1e-8);
}

TEST_CASE("energy residual over a long horizon") {
  const auto pend = pendulum_model(1.0);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const PhasePoint z0 = random_phase_point(rng, 1, 2.0, 2.0);
    const Trajectory traj = integrate(pend, z0, forward_cfg(20.0));
    CHECK(energy_residual(pend, traj) <= 1e-8);
    CHECK(h_sign_constant(traj));
  }
}

TEST_CASE("energy residual and sign preservation across the registry") {
  std::mt19937_64 rng(16);
  for (const auto& model : registry_models()) {
    if (model.sign() != MonotoneSign::Minus) continue;
    for (int trial = 0; trial < 25; ++trial) {
      const PhasePoint z0 = random_phase_point(rng, model.dim(), 1.5, 1.5);
      const Trajectory traj = integrate(model, z0, forward_cfg(10.0));
      CHECK(energy_residual(model, traj) <= 1e-8);
      CHECK(h_sign_constant(traj));
    }
  }
}

TEST_CASE("zero-shell orbits stay on the shell") {
  const auto pend = pendulum_model(1.0);
  const double x0 = 1.0;
  const PhasePoint z0 = phase_point({x0}, {0.0}, -std::cos(x0));
  REQUIRE(eval_hamiltonian(pend, z0) == 0.0);
  IntegratorConfig cfg = forward_cfg(10.0);
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  const Trajectory traj = integrate(pend, z0, cfg);
  CHECK(energy_residual(pend, traj) <= 1e-10);
  for (double h : traj.h_values) CHECK(std::abs(h) <= 1e-10);

  // third Lyapunov function: u non-decreasing on the zero shell
  for (std::size_t k = 1; k < traj.size(); ++k)
    CHECK(traj.points[k].u >= traj.points[k - 1].u - 1e-9 * (traj.times[k] - traj.times[k - 1]));
}

TEST_CASE("single-point trajectory has zero residual") {
  const auto pend = pendulum_model(1.0);
  Trajectory traj;
  traj.times = {0.0};
  traj.points = {phase_point({0.3}, {0.4}, 0.5)};
  traj.h_values = {eval_hamiltonian(pend, traj.points[0])};
  CHECK(energy_residual(pend, traj) == 0.0);
}

TEST_CASE("equilibrium start terminates as converged") {
  const auto pend = pendulum_model(1.0);
  const Trajectory traj = integrate(pend, phase_point({0.0}, {0.0}, -1.0), forward_cfg(5.0));
  CHECK(traj.termination == Termination::ConvergedToEquilibrium);
  for (const auto& z : traj.points) {
    CHECK(torus_distance(z.x, torus_point({0.0})) <= 1e-9);
    CHECK(std::abs(z.u + 1.0) <= 1e-9);
  }
}

TEST_CASE("backward run from small positive energy blows up by the radius guard") {
  const auto pend = pendulum_model(1.0);
  const PhasePoint z0 = phase_point({0.0}, {0.0}, -0.99);  // H = 0.01
  IntegratorConfig cfg = forward_cfg(25.0);
  cfg.direction = Direction::Backward;
  const Trajectory traj = integrate(pend, z0, cfg);
  CHECK(traj.termination == Termination::BlowUp);
  CHECK(traj.times.back() > -20.0);
  CHECK(traj.termination_witness.has_value());
  // |H| grows like e^{lambda |t|} on the way out.
  const auto verdictless_growth =
      std::abs(traj.h_values.back()) / std::abs(traj.h_values.front());
  CHECK(verdictless_growth > std::exp(1.0 * std::abs(traj.times.back())) * 0.5);
}

TEST_CASE("step underflow is reported, never silent") {
  // Disabling the radius guard lets the backward orbit run into float
  // overflow; the controller must report underflow instead of spinning.
  const auto pend = pendulum_model(1.0);
  IntegratorConfig cfg = forward_cfg(400.0);
  cfg.direction = Direction::Backward;
  cfg.blow_up_radius = std::numeric_limits<double>::infinity();
  const PhasePoint z0 = phase_point({0.5}, {0.3}, 0.01 - 0.3 * 0.3 / 2 - std::cos(0.5));
  const Trajectory traj = integrate(pend, z0, cfg);
  CHECK(traj.termination == Termination::StepUnderflow);
}

TEST_CASE("first Lyapunov bound along forward orbits") {
  const auto pend = pendulum_model(1.0);
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Trajectory traj = integrate(pend, random_phase_point(rng, 1), forward_cfg(10.0));
    CHECK(check_first_lyapunov(pend, traj).ok);
  }

  // H(z0) = 0: the bound degenerates to the absolute slack.
  const PhasePoint on_shell = phase_point({1.0}, {0.0}, -std::cos(1.0));
  IntegratorConfig tight = forward_cfg(10.0);
  tight.rel_tol = 1e-10;
  tight.abs_tol = 1e-12;
  const Trajectory traj = integrate(pend, on_shell, tight);
  CHECK(check_first_lyapunov(pend, traj).ok);
}

TEST_CASE("first Lyapunov under the mirrored (M+) model, backward") {
  const auto mirror = pendulum_model(1.0).mirrored();
  REQUIRE(mirror.sign() == MonotoneSign::Plus);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    IntegratorConfig cfg = forward_cfg(10.0);
    cfg.direction = Direction::Backward;
    const Trajectory traj = integrate(mirror, random_phase_point(rng, 1), cfg);
    CHECK(check_first_lyapunov(mirror, traj).ok);
  }
}

TEST_CASE("time reversal mirror") {
  const auto pend = pendulum_model(1.0);
  const auto mirror = pend.mirrored();
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    const PhasePoint z0 = random_phase_point(rng, 1, 1.0, 1.0);
    const double T = 3.0;
    const Trajectory fwd = integrate(pend, z0, forward_cfg(T));
    REQUIRE(fwd.termination == Termination::ReachedTFinal);

    IntegratorConfig cfg = forward_cfg(T);
    cfg.direction = Direction::Backward;
    const PhasePoint w0(z0.x, -z0.p, -z0.u);
    const Trajectory bwd = integrate(mirror, w0, cfg);
    REQUIRE(bwd.termination == Termination::ReachedTFinal);

    const PhasePoint zf = fwd.points.back();
    const PhasePoint wf = bwd.points.back();
    CHECK(torus_distance(zf.x, wf.x) <= 1e-7);
    CHECK((zf.p + wf.p).norm() <= 1e-7);
    CHECK(std::abs(zf.u + wf.u) <= 1e-7);
  }
}

TEST_CASE("halving rel_tol does not inflate the energy residual") {
  const auto pend = pendulum_model(1.0);
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 5; ++trial) {
    const PhasePoint z0 = random_phase_point(rng, 1);
    IntegratorConfig coarse = forward_cfg(10.0);
    coarse.rel_tol = 1e-6;
    coarse.abs_tol = 1e-8;
    IntegratorConfig fine = coarse;
    fine.rel_tol /= 2.0;
    const double r_coarse = energy_residual(pend, integrate(pend, z0, coarse));
    const double r_fine = energy_residual(pend, integrate(pend, z0, fine));
    CHECK(r_fine <= 2.0 * r_coarse + 1e-14);
  }
}

TEST_CASE("dense output matches stored steps") {
  const auto pend = pendulum_model(1.0);
  const Trajectory traj = integrate(pend, phase_point({0.3}, {0.7}, 0.2), forward_cfg(5.0));
  for (std::size_t k = 0; k < traj.size(); k += 7) {
    const PhasePoint z = traj.point_at(traj.times[k]);
    CHECK(phase_distance(z, traj.points[k]) <= 1e-12);
  }
  // midpoints stay on the orbit: H follows the decay law there too
  const double h0 = traj.h_values.front();
  for (std::size_t k = 0; k + 1 < traj.size(); k += 5) {
    const double tm = 0.5 * (traj.times[k] + traj.times[k + 1]);
    const PhasePoint zm = traj.point_at(tm);
    CHECK(std::abs(eval_hamiltonian(pend, zm) - std::exp(-tm) * h0) <= 1e-7);
  }
}

TEST_CASE("second Lyapunov function along orbits") {
  const auto pend = pendulum_model(1.0);
  const GridFunction uref = solve_hj(pend, Grid(1, 256));
  const double slack = uref.grid_slack();
  IntegratorConfig cfg = forward_cfg(10.0);

  SUBCASE("F(z0) = 2 decays exponentially") {
    const double x0 = 0.8;
    const double u0 = interpolate(uref, VecN::Constant(1, x0)) - 2.0;
    const Trajectory traj = integrate(pend, phase_point({x0}, {0.5}, u0), cfg, &uref);
    REQUIRE(traj.f_values.front() == doctest::Approx(2.0));
    const auto verdict = check_second_lyapunov(pend, traj, uref);
    CHECK(verdict.ok);
    for (std::size_t k = 0; k < traj.size(); ++k)
      CHECK(traj.f_values[k] <= 2.0 * std::exp(-traj.times[k]) + slack);
  }

  SUBCASE("F(z0) < 0 stays inside U") {
    const double x0 = 1.7;
    const double u0 = interpolate(uref, VecN::Constant(1, x0)) + 0.5;  // F = -0.5
    const Trajectory traj = integrate(pend, phase_point({x0}, {0.0}, u0), cfg, &uref);
    CHECK(check_second_lyapunov(pend, traj, uref).ok);  // vacuous: no F >= 0 anchor
    for (double f : traj.f_values) CHECK(f <= slack);
  }

  SUBCASE("starting on the solution graph keeps F within the grid slack") {
    // The equality case is local: it holds while the orbit rides the
    // differentiable part of the graph. Past the gradient kink at x = pi
    // the orbit leaves the graph (the sink itself sits a fixed amount
    // below it), so the window ends before the kink crossing.
    const int node = 80;  // x ~ 1.96, on the smooth ascending branch
    const auto grads = one_sided_gradients(uref);
    const double p0 = 0.5 * (grads.forward[0][node] + grads.backward[0][node]);
    const PhasePoint z0 = phase_point({uref.grid.h * node}, {p0}, uref.values[node]);
    const Trajectory traj = integrate(pend, z0, forward_cfg(1.0), &uref);
    REQUIRE(traj.points.back().x.coords[0] < kTwoPi / 2.0);  // still left of the kink
    for (double f : traj.f_values) CHECK(std::abs(f) <= slack);
  }

  SUBCASE("kind mismatch is a contract error") {
    const Trajectory traj = integrate(pend, phase_point({0.3}, {0.1}, 0.0), cfg, &uref);
    CHECK_THROWS_AS(check_second_lyapunov(pend.mirrored(), traj, uref), ContractError);
    const Trajectory bare = integrate(pend, phase_point({0.3}, {0.1}, 0.0), cfg);
    CHECK_THROWS_AS(check_second_lyapunov(pend, bare, uref), ContractError);
  }

  SUBCASE("dimension mismatch is a contract error") {
    const GridFunction wrong = solve_hj(torus2_model(1.0), Grid(2, 32));
    CHECK_THROWS_AS(integrate(pend, phase_point({0.3}, {0.1}, 0.0), cfg, &wrong), ContractError);
  }
}

TEST_CASE("classify_limit on the pendulum") {
  const auto pend = pendulum_model(1.0);
  const std::vector<PhasePoint> eqs = {phase_point({0.0}, {0.0}, -1.0),
                                       phase_point({kTwoPi / 2.0}, {0.0}, 1.0)};
  IntegratorConfig cfg = forward_cfg(150.0);

  SUBCASE("generic zero-shell start lands on the focus") {
    const PhasePoint z0 = phase_point({0.1}, {0.0}, -std::cos(0.1));
    const auto c = classify_limit(pend, z0, eqs, cfg);
    REQUIRE(c.kind == LimitClassification::Kind::Equilibrium);
    CHECK(c.equilibrium_id == 1);
  }
  SUBCASE("equilibrium start classifies as itself") {
    const auto c = classify_limit(pend, eqs[0], eqs, cfg);
    REQUIRE(c.kind == LimitClassification::Kind::Equilibrium);
    CHECK(c.equilibrium_id == 0);
  }
  SUBCASE("far-off start still attracted") {
    const PhasePoint z0 = phase_point({2.0}, {1.5}, 3.0);
    const auto c = classify_limit(pend, z0, eqs, cfg);
    REQUIRE(c.kind == LimitClassification::Kind::Equilibrium);
    CHECK(c.equilibrium_id == 1);
  }
  SUBCASE("tiny horizon stays undecided") {
    IntegratorConfig brief = forward_cfg(0.5);
    const PhasePoint z0 = phase_point({2.0}, {1.5}, 3.0);
    const auto c = classify_limit(pend, z0, eqs, brief);
    CHECK(c.kind == LimitClassification::Kind::Undecided);
  }
}

TEST_SUITE_END();
