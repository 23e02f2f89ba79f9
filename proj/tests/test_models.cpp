#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hamel/models.hpp"

using namespace hamel;

TEST_CASE("the expected catalog of builtin models is present") {
  const auto names = builtin_names();
  const std::vector<std::string> want = {
      "heisenberg",     "vertical_disc_kin", "vertical_disc_dyn",
      "falling_disc_kin", "rigid_body_dyn",  "sphere_dyn"};
  for (const auto& n : want) {
    CAPTURE(n);
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  }
  CHECK(names.size() == want.size());
}

TEST_CASE("unknown model names raise UnknownModel") {
  CHECK_THROWS_AS(builtin("no_such_model"), UnknownModel);
  try {
    builtin("heisenburg");  // typo: message should list valid names
    FAIL("expected UnknownModel");
  } catch (const UnknownModel& e) {
    CHECK(std::string(e.what()).find("heisenberg") != std::string::npos);
  }
}

TEST_CASE("every model carries a frame, a box, and at least one scenario") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const BuiltinModel model = builtin(name);
    CHECK(model.name == name);
    CHECK_FALSE(model.title.empty());
    CHECK(model.frame.dof() > 0);
    CHECK(model.chart_box.lo.size() == model.frame.dof());
    CHECK(model.chart_box.hi.size() == model.frame.dof());
    CHECK((model.chart_box.hi - model.chart_box.lo).minCoeff() > 0.0);
    CHECK_FALSE(model.scenarios.empty());
    CHECK(static_cast<bool>(model.reference_rhs));
    // Layout support is consistent with the stored problems.
    CHECK(model.supports(Layout::kinematic_oc) == model.kinematic.has_value());
    CHECK(model.supports(Layout::dynamic_oc) == model.dynamic.has_value());
    CHECK(model.supports(Layout::mechanics) == model.mechanical.has_value());
  }
}

TEST_CASE("scenario endpoints live inside the sampling box") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const BuiltinModel model = builtin(name);
    for (const Scenario& sc : model.scenarios) {
      CAPTURE(sc.name);
      CHECK(model.supports(sc.layout));
      CHECK(sc.bc.t1 > sc.bc.t0);
      for (int i = 0; i < model.frame.dof(); ++i) {
        CHECK(sc.bc.q0(i) >= model.chart_box.lo(i) - 1e-12);
        CHECK(sc.bc.q0(i) <= model.chart_box.hi(i) + 1e-12);
        CHECK(sc.bc.q1(i) >= model.chart_box.lo(i) - 1e-12);
        CHECK(sc.bc.q1(i) <= model.chart_box.hi(i) + 1e-12);
      }
      if (sc.layout == Layout::dynamic_oc) {
        CHECK(sc.bc.u0.has_value());
        CHECK(sc.bc.u1.has_value());
      }
    }
  }
}

TEST_CASE("scenario lookup by name") {
  const BuiltinModel model = builtin("vertical_disc_kin");
  const Scenario& roll = model.scenario("roll");
  CHECK(roll.name == "roll");
  CHECK_THROWS_AS(model.scenario("no_such_scenario"), InvalidProblem);
}

TEST_CASE("reference rhs rejects unsupported layouts") {
  const BuiltinModel model = builtin("heisenberg");
  const StateLayout lay(Layout::kinematic_oc, 3, 1);
  CHECK_THROWS_AS(
      model.reference_rhs(Layout::dynamic_oc, Vec::Zero(12), Vec()),
      UnsupportedLayout);
  CHECK_THROWS_AS(
      model.reference_rhs(Layout::mechanics, Vec::Zero(5), Vec::Zero(2)),
      UnsupportedLayout);
  CHECK_NOTHROW(model.reference_rhs(Layout::kinematic_oc,
                                    Vec::Zero(lay.size()), Vec()));
}

TEST_CASE("inertia parameters reshape the rigid body model") {
  const BuiltinModel base = builtin("rigid_body_dyn");
  const BuiltinModel ball = builtin("rigid_body_dyn",
                                    {{"Ixx", 2.0}, {"Iyy", 2.0}, {"Izz", 2.0}});
  // With equal inertias the torque-free Euler terms vanish.
  Vec state(6);
  state << 0, 0, 0, 1, 2, 3;
  auto zero = [](double) { return Vec::Zero(3); };
  REQUIRE(ball.mechanical.has_value());
  const Vec rhs = mechanics_rhs(*ball.mechanical, zero, 0.0, state);
  CHECK(rhs.segment(3, 3).cwiseAbs().maxCoeff() < 1e-12);
  // The default inertias do not.
  const Vec rhs0 = mechanics_rhs(*base.mechanical, zero, 0.0, state);
  CHECK(rhs0.segment(3, 3).cwiseAbs().maxCoeff() > 1.0);
}

TEST_CASE("wheel radius parameter enters the tilting wheel frame") {
  const BuiltinModel unit = builtin("falling_disc_kin");
  const BuiltinModel wide = builtin("falling_disc_kin", {{"r", 2.0}});
  Vec q = Vec::Zero(5);
  q(1) = M_PI / 2.0;
  const Mat psi_unit = unit.frame.psi_at(q);
  const Mat psi_wide = wide.frame.psi_at(q);
  CHECK(psi_wide(3, 2) == doctest::Approx(2.0 * psi_unit(3, 2)));
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(builtin("falling_disc_kin", {{"r", 0.0}}), InvalidProblem);
  CHECK_THROWS_AS(builtin("falling_disc_kin", {{"r", -1.0}}), InvalidProblem);
  CHECK_THROWS_AS(builtin("rigid_body_dyn", {{"Ixx", -2.0}}), InvalidProblem);
  CHECK_THROWS_AS(builtin("rigid_body_dyn", {{"bogus", 1.0}}), InvalidProblem);
  CHECK_THROWS_AS(builtin("heisenberg", {{"r", 1.0}}), InvalidProblem);
}

TEST_CASE("constrained slots are the trailing pair for the tilting wheel") {
  const BuiltinModel model = builtin("falling_disc_kin");
  const std::vector<int> want = {3, 4};
  CHECK(model.frame.constrained_slots() == want);
  // Default models constrain the leading slots.
  const BuiltinModel wheel = builtin("vertical_disc_kin");
  const std::vector<int> lead = {0, 1};
  CHECK(wheel.frame.constrained_slots() == lead);
}

TEST_CASE("scenario shooting configs stay within documented defaults") {
  for (const auto& name : builtin_names()) {
    const BuiltinModel model = builtin(name);
    for (const Scenario& sc : model.scenarios) {
      CAPTURE(name);
      CAPTURE(sc.name);
      CHECK(sc.config.steps >= 16);
      CHECK(sc.config.newton_tol == 1e-9);
      CHECK(sc.config.max_iters == 50);
      CHECK(sc.config.seed == kDefaultSeed);
    }
  }
}
