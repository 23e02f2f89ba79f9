#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "hamel/io.hpp"
#include "hamel/solvers.hpp"

using namespace hamel;

namespace {

ShootResult solve_scenario(const BuiltinModel& model, const char* scenario) {
  const Scenario& sc = model.scenario(scenario);
  if (sc.layout == Layout::dynamic_oc)
    return shoot_dynamic(*model.dynamic, sc.bc, sc.guess, sc.config);
  return shoot_kinematic(*model.kinematic, sc.bc, sc.guess, sc.config);
}

SolveInfo info_for(const BuiltinModel& model, const char* scenario,
                   const ShootResult& result) {
  SolveInfo info;
  info.model = model.name;
  info.scenario = scenario;
  info.converged = true;
  info.residual_norm = result.residual_norm;
  info.iterations = result.iterations;
  info.unknowns = result.unknowns;
  return info;
}

}  // namespace

TEST_CASE("csv column names by layout") {
  const BuiltinModel kin = builtin("heisenberg");
  const auto kc = csv_columns(kin, Layout::kinematic_oc);
  const std::vector<std::string> want_kin = {"t",  "q1", "q2", "q3",
                                             "u2", "u3", "mu1"};
  CHECK(kc == want_kin);

  const BuiltinModel dyn = builtin("vertical_disc_dyn");
  const auto dc = csv_columns(dyn, Layout::dynamic_oc);
  // Free slots are 3 and 4; constrained multipliers sit on slots 1 and 2.
  const std::vector<std::string> want_dyn = {
      "t",  "q1", "q2", "q3", "q4", "u3", "u4", "a3",
      "a4", "j3", "j4", "mu1", "mu2", "Q3", "Q4"};
  CHECK(dc == want_dyn);

  const auto mc = csv_columns(dyn, Layout::mechanics);
  const std::vector<std::string> want_mech = {"t",  "q1", "q2", "q3",
                                              "q4", "u3", "u4"};
  CHECK(mc == want_mech);
}

TEST_CASE("tilting wheel columns name the trailing constrained slots") {
  const BuiltinModel model = builtin("falling_disc_kin");
  const auto cols = csv_columns(model, Layout::kinematic_oc);
  const std::vector<std::string> want = {"t",  "q1", "q2", "q3", "q4", "q5",
                                         "u1", "u2", "u3", "mu4", "mu5"};
  CHECK(cols == want);
}

TEST_CASE("csv round-trips a solved trajectory at full precision") {
  const BuiltinModel model = builtin("heisenberg");
  const ShootResult result = solve_scenario(model, "steer_z");

  std::ostringstream out;
  write_csv(out, model, result.trajectory, info_for(model, "steer_z", result));
  const std::string text = out.str();

  // Header first, no comment lines for a converged solve.
  CHECK(text.rfind("t,q1,", 0) == 0);

  std::istringstream in(text);
  const Trajectory back = read_csv(in, model, Layout::kinematic_oc);
  REQUIRE(back.states.size() == result.trajectory.states.size());
  for (size_t i = 0; i < back.states.size(); ++i) {
    CHECK(back.times[i] == result.trajectory.times[i]);
    CHECK((back.states[i].array() == result.trajectory.states[i].array()).all());
  }
}

TEST_CASE("unconverged output is flagged in a comment line") {
  const BuiltinModel model = builtin("heisenberg");
  const Scenario& sc = model.scenario("steer_z");
  const Trajectory traj =
      integrate_kinematic(*model.kinematic, sc.bc,
                          (Vec(3) << 1.0, 0.0, 0.0).finished(), 32);
  SolveInfo info;
  info.model = model.name;
  info.scenario = sc.name;
  info.converged = false;
  info.residual_norm = 0.5;
  info.iterations = 50;

  std::ostringstream out;
  write_csv(out, model, traj, info);
  const std::string text = out.str();
  CHECK(text.rfind("# converged=false", 0) == 0);
  CHECK(text.find("residual") != std::string::npos);

  // The comment does not break reading.
  std::istringstream in(text);
  const Trajectory back = read_csv(in, model, Layout::kinematic_oc);
  CHECK(back.states.size() == traj.states.size());
}

TEST_CASE("csv reader rejects a header from the wrong layout") {
  const BuiltinModel model = builtin("vertical_disc_dyn");
  const ShootResult result = solve_scenario(model, "roll_theta");
  std::ostringstream out;
  write_csv(out, model, result.trajectory,
            info_for(model, "roll_theta", result));

  std::istringstream in(out.str());
  CHECK_THROWS_AS(read_csv(in, model, Layout::kinematic_oc), InvalidProblem);
}

TEST_CASE("csv reader rejects empty input") {
  const BuiltinModel model = builtin("heisenberg");
  std::istringstream in("");
  CHECK_THROWS_AS(read_csv(in, model, Layout::kinematic_oc), InvalidProblem);
}

TEST_CASE("recovered controls match the forced equations along a solve") {
  const BuiltinModel model = builtin("rigid_body_dyn");
  const ShootResult result = solve_scenario(model, "reorient");
  const auto controls = recovered_controls(model, result.trajectory);
  REQUIRE(controls.size() == result.trajectory.states.size());

  // Feeding the recovered torque back into the forced equations reproduces
  // the stored acceleration at each node.
  const StateLayout lay(Layout::dynamic_oc, 3, 0);
  for (size_t i = 0; i < controls.size(); i += 50) {
    const Vec& x = result.trajectory.states[i];
    Vec mech_state(6);
    mech_state << lay.q(x), lay.u(x);
    auto forces = [&](double) { return controls[i]; };
    const Vec rhs = mechanics_rhs(*model.mechanical, forces, 0.0, mech_state);
    CHECK((rhs.segment(3, 3) - lay.a(x)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("json export carries the info block and per-step rows") {
  const BuiltinModel model = builtin("heisenberg");
  const ShootResult result = solve_scenario(model, "steer_z");
  std::ostringstream out;
  write_json(out, model, result.trajectory,
             info_for(model, "steer_z", result));
  const std::string text = out.str();
  CHECK(text.find("\"model\"") != std::string::npos);
  CHECK(text.find("\"heisenberg\"") != std::string::npos);
  CHECK(text.find("\"converged\"") != std::string::npos);
  CHECK(text.find("\"columns\"") != std::string::npos);
  CHECK(text.find("\"rows\"") != std::string::npos);
  CHECK(text.find("\"max_constraint_residual\"") != std::string::npos);
}
