#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hamel/models.hpp"
#include "hamel/solvers.hpp"

using namespace hamel;

TEST_CASE("rk4 integrates the exponential to fourth-order accuracy") {
  auto rhs = [](double, const Vec& x) { return x; };
  const Vec x0 = Vec::Ones(1);

  const Trajectory t100 = integrate(rhs, x0, 0.0, 1.0, 100);
  REQUIRE(t100.steps() == 100);
  CHECK(t100.t0() == 0.0);
  CHECK(t100.t1() == 1.0);
  const double e100 = std::abs(t100.states.back()(0) - std::exp(1.0));
  CHECK(e100 < 1e-8);

  const Trajectory t200 = integrate(rhs, x0, 0.0, 1.0, 200);
  const double e200 = std::abs(t200.states.back()(0) - std::exp(1.0));
  // Halving the step divides the global error by about 2^4.
  CHECK(e100 / e200 > 12.0);
  CHECK(e100 / e200 < 20.0);
}

TEST_CASE("rk4 grid endpoints are exact") {
  auto rhs = [](double, const Vec& x) { return Vec::Zero(x.size()); };
  const Trajectory traj = integrate(rhs, Vec::Zero(2), 0.0, 0.7, 7);
  CHECK(traj.times.back() == 0.7);
  CHECK(traj.times.size() == 8);
}

TEST_CASE("integrate validates its arguments") {
  auto rhs = [](double, const Vec& x) { return x; };
  CHECK_THROWS_AS(integrate(rhs, Vec::Ones(1), 0.0, 1.0, 0), InvalidProblem);
  CHECK_THROWS_AS(integrate(rhs, Vec::Ones(1), 1.0, 1.0, 10), InvalidProblem);
  Vec bad = Vec::Ones(1);
  bad(0) = std::nan("");
  CHECK_THROWS_AS(integrate(rhs, bad, 0.0, 1.0, 10), InvalidProblem);
}

TEST_CASE("integrate reports the failing step when the field blows up") {
  auto rhs = [](double, const Vec& x) {
    Vec d = x;
    d(0) = x(0) * x(0) * 1e3;  // finite-time blowup
    return d;
  };
  try {
    integrate(rhs, Vec::Ones(1), 0.0, 10.0, 64);
    FAIL("expected InvalidProblem");
  } catch (const InvalidProblem& e) {
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
  }
}

TEST_CASE("cost quadrature reproduces a smooth integral") {
  // Cost integrand e^{2 q1} along a trajectory with q1(t) = t gives
  // int_0^1 e^{2t} dt = (e^2 - 1) / 2.
  const BuiltinModel model = builtin("heisenberg");
  KinematicOCP ocp = *model.kinematic;
  ocp.cost = CostKinematic{};
  ocp.cost.value = [](const Vec& q, const Vec&) { return std::exp(2.0 * q(0)); };

  auto make_traj = [&](int steps) {
    Trajectory traj;
    traj.layout = Layout::kinematic_oc;
    const StateLayout lay(Layout::kinematic_oc, 3, 1);
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      Vec x = Vec::Zero(lay.size());
      x(0) = t;
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
    return traj;
  };

  const double want = (std::exp(2.0) - 1.0) / 2.0;
  CHECK(std::abs(evaluate_cost(ocp, make_traj(100)) - want) < 1e-7);
  // Odd step count exercises the 3/8 tail rule.
  CHECK(std::abs(evaluate_cost(ocp, make_traj(101)) - want) < 1e-7);
  // A single panel falls back to the trapezoid rule.
  const double trap = evaluate_cost(ocp, make_traj(1));
  CHECK(trap == doctest::Approx(0.5 * (1.0 + std::exp(2.0))));
}

TEST_CASE("cost quadrature rejects the wrong trajectory layout") {
  const BuiltinModel model = builtin("heisenberg");
  Trajectory traj;
  traj.layout = Layout::mechanics;
  traj.times = {0.0, 1.0};
  traj.states = {Vec::Zero(5), Vec::Zero(5)};
  CHECK_THROWS_AS(evaluate_cost(*model.kinematic, traj), InvalidProblem);
}

TEST_CASE("packed unknown lengths are validated") {
  const BuiltinModel model = builtin("vertical_disc_kin");
  const Scenario& sc = model.scenario("roll");
  CHECK_THROWS_AS(
      integrate_kinematic(*model.kinematic, sc.bc, Vec::Zero(3), 64),
      InvalidProblem);
  CHECK_THROWS_AS(
      shoot_kinematic(*model.kinematic, sc.bc, Vec::Zero(3), sc.config),
      InvalidProblem);

  const BuiltinModel ball = builtin("sphere_dyn");
  const Scenario& rs = ball.scenario("reorient");
  CHECK_THROWS_AS(integrate_dynamic(*ball.dynamic, rs.bc, Vec::Zero(5), 64),
                  InvalidProblem);
  CHECK_THROWS_AS(shoot_dynamic(*ball.dynamic, rs.bc, Vec::Zero(5), rs.config),
                  InvalidProblem);
}

TEST_CASE("too coarse a shooting grid is rejected") {
  const BuiltinModel model = builtin("vertical_disc_kin");
  const Scenario& sc = model.scenario("roll");
  ShootingConfig config = sc.config;
  config.steps = 8;
  CHECK_THROWS_AS(shoot_kinematic(*model.kinematic, sc.bc, sc.guess, config),
                  InvalidProblem);
}

TEST_CASE("straight roll converges at the interpolation guess") {
  const BuiltinModel model = builtin("vertical_disc_kin");
  const Scenario& sc = model.scenario("roll");
  const ShootResult result =
      shoot_kinematic(*model.kinematic, sc.bc, sc.guess, sc.config);
  CHECK(result.residual_norm <= sc.config.newton_tol);
  CHECK(result.iterations == 0);
  CHECK(result.restarts_used == 0);
  // Constant forward roll at the average speed.
  CHECK(result.unknowns(0) == doctest::Approx(2.0));
  CHECK(std::abs(result.unknowns(1)) < 1e-9);
  CHECK(evaluate_cost(*model.kinematic, result.trajectory) ==
        doctest::Approx(2.0).epsilon(1e-9));
  // Endpoint hits the target configuration.
  const Vec qe = result.trajectory.states.back().segment(0, 4);
  CHECK((qe - sc.bc.q1).cwiseAbs().maxCoeff() <= sc.config.newton_tol);
}

TEST_CASE("parking at the start is the zero solution with a degenerate jacobian") {
  const BuiltinModel model = builtin("vertical_disc_kin");
  const Scenario& sc = model.scenario("park");
  const ShootResult result =
      shoot_kinematic(*model.kinematic, sc.bc, sc.guess, sc.config);
  CHECK(result.residual_norm <= sc.config.newton_tol);
  CHECK(result.unknowns.cwiseAbs().maxCoeff() < 1e-12);
  // The stationary solution leaves whole directions flat.
  CHECK(result.degenerate_directions > 0);
  CHECK(result.jacobian_singular_values.size() == 4);
}

TEST_CASE("shooting results are deterministic and reproducible") {
  const BuiltinModel model = builtin("heisenberg");
  const Scenario& sc = model.scenario("steer_z");
  const ShootResult a = shoot_kinematic(*model.kinematic, sc.bc, sc.guess, sc.config);
  const ShootResult b = shoot_kinematic(*model.kinematic, sc.bc, sc.guess, sc.config);
  REQUIRE(a.unknowns.size() == b.unknowns.size());
  CHECK((a.unknowns.array() == b.unknowns.array()).all());
  CHECK(a.residual_norm == b.residual_norm);
  CHECK(a.iterations == b.iterations);

  // Re-integrating the returned unknowns reproduces the stored trajectory
  // bit for bit.
  const Trajectory redo =
      integrate_kinematic(*model.kinematic, sc.bc, a.unknowns, sc.config.steps);
  REQUIRE(redo.states.size() == a.trajectory.states.size());
  for (size_t i = 0; i < redo.states.size(); ++i)
    CHECK((redo.states[i].array() == a.trajectory.states[i].array()).all());
}

TEST_CASE("rest-to-rest reorientation converges from the ramp policy") {
  const BuiltinModel model = builtin("rigid_body_dyn");
  const Scenario& sc = model.scenario("reorient");
  const ShootResult result =
      shoot_dynamic(*model.dynamic, sc.bc, sc.guess, sc.config);
  CHECK(result.residual_norm <= sc.config.newton_tol);
  CHECK(result.restarts_used == 0);
  const Vec& xe = result.trajectory.states.back();
  CHECK((xe.segment(0, 3) - sc.bc.q1).cwiseAbs().maxCoeff() <=
        sc.config.newton_tol);
  CHECK((xe.segment(3, 3) - *sc.bc.u1).cwiseAbs().maxCoeff() <=
        sc.config.newton_tol);
}

TEST_CASE("unreachable targets raise NoConvergence with the best attempt") {
  const BuiltinModel model = builtin("heisenberg");
  BoundaryConditions bc = model.scenario("steer_z").bc;
  bc.q1(2) = 400.0;  // far beyond reach for T = 1
  ShootingConfig config = model.scenario("steer_z").config;
  config.max_iters = 4;
  config.restarts = 1;
  try {
    shoot_kinematic(*model.kinematic, bc, Vec(), config);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.best_residual > config.newton_tol);
    CHECK(std::isfinite(e.best_residual));
    CHECK(e.best_unknowns.size() == 3);
    CHECK(e.iterations > 0);
  }
}

TEST_CASE("dynamic boundary data must include endpoint velocities") {
  const BuiltinModel model = builtin("sphere_dyn");
  BoundaryConditions bc = model.scenario("reorient").bc;
  bc.u1.reset();
  CHECK_THROWS_AS(
      shoot_dynamic(*model.dynamic, bc, Vec(), model.scenario("reorient").config),
      InvalidProblem);
}
