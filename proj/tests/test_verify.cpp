#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hamel/solvers.hpp"
#include "hamel/verify.hpp"

using namespace hamel;

TEST_CASE("frame checks pass on a builtin frame") {
  const BuiltinModel model = builtin("vertical_disc_kin");
  VerifyOptions opts;
  opts.samples = 50;
  const VerificationReport report =
      check_frame(model.frame, model.chart_box, opts);
  CHECK(report.all_pass());
  REQUIRE(report.checks.size() == 3);
  CHECK(report.checks[0].name == "psi_phi_identity");
  CHECK(report.checks[1].name == "gamma_antisymmetry");
  CHECK(report.checks[2].name == "gamma_fd_agreement");
  for (const auto& c : report.checks) {
    CHECK(c.pass);
    CHECK(c.max_abs_error <= c.threshold);
  }
}

TEST_CASE("frame checks record singular draws instead of throwing") {
  // A box pinned on the tilting wheel's singular set theta = 0.
  const BuiltinModel model = builtin("falling_disc_kin");
  SampleBox box = model.chart_box;
  box.lo(1) = 0.0;
  box.hi(1) = 0.0;
  VerifyOptions opts;
  opts.samples = 40;
  VerificationReport report;
  CHECK_NOTHROW(report = check_frame(model.frame, box, opts));
  CHECK_FALSE(report.all_pass());
  bool saw_sampling_failure = false;
  for (const auto& c : report.checks)
    if (!c.pass && c.note.find("singular") != std::string::npos)
      saw_sampling_failure = true;
  CHECK(saw_sampling_failure);
}

TEST_CASE("rhs comparison sweeps pass for every supported layout") {
  VerifyOptions opts;
  opts.samples = 60;
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const BuiltinModel model = builtin(name);
    for (Layout layout :
         {Layout::mechanics, Layout::kinematic_oc, Layout::dynamic_oc}) {
      if (!model.supports(layout)) continue;
      const VerificationReport report = compare_rhs(model, layout, opts);
      CHECK(report.all_pass());
      REQUIRE_FALSE(report.checks.empty());
      CHECK(report.checks[0].samples == opts.samples);
    }
  }
}

TEST_CASE("rhs comparison is deterministic for a fixed seed") {
  const BuiltinModel model = builtin("rigid_body_dyn");
  VerifyOptions opts;
  opts.samples = 40;
  opts.seed = 1234;
  const VerificationReport a = compare_rhs(model, Layout::dynamic_oc, opts);
  const VerificationReport b = compare_rhs(model, Layout::dynamic_oc, opts);
  REQUIRE(a.checks.size() == b.checks.size());
  CHECK(a.checks[0].max_abs_error == b.checks[0].max_abs_error);

  opts.seed = 4321;
  const VerificationReport c = compare_rhs(model, Layout::dynamic_oc, opts);
  // Different draw, almost surely a different maximum.
  CHECK(a.checks[0].max_abs_error != c.checks[0].max_abs_error);
}

TEST_CASE("serial and parallel sweeps agree bitwise") {
  const BuiltinModel model = builtin("falling_disc_kin");
  VerifyOptions serial, parallel;
  serial.samples = parallel.samples = 50;
  serial.parallel = false;
  parallel.parallel = true;
  const VerificationReport a = compare_rhs(model, Layout::kinematic_oc, serial);
  const VerificationReport b = compare_rhs(model, Layout::kinematic_oc, parallel);
  REQUIRE(a.checks.size() == b.checks.size());
  for (size_t i = 0; i < a.checks.size(); ++i)
    CHECK(a.checks[i].max_abs_error == b.checks[i].max_abs_error);
}

TEST_CASE("trajectory monitor confirms multiplier constancy on a flow") {
  const BuiltinModel model = builtin("heisenberg");
  const Scenario& sc = model.scenario("steer_z");
  const ShootResult sol =
      shoot_kinematic(*model.kinematic, sc.bc, sc.guess, sc.config);
  const VerificationReport report = monitor(model, sol.trajectory);
  CHECK(report.all_pass());
  bool saw_multiplier = false, saw_constraint = false;
  for (const auto& c : report.checks) {
    if (c.name == "multiplier_constancy") saw_multiplier = true;
    if (c.name == "constraint_residual") saw_constraint = true;
  }
  CHECK(saw_multiplier);
  CHECK(saw_constraint);
}

TEST_CASE("stationarity probe finds no descent direction at an optimum") {
  const BuiltinModel model = builtin("vertical_disc_kin");
  const Scenario& sc = model.scenario("roll");
  const ShootResult sol =
      shoot_kinematic(*model.kinematic, sc.bc, sc.guess, sc.config);
  const VerificationReport report =
      stationarity_probe(model, sc, sol, 8, kDefaultSeed);
  CHECK(report.all_pass());
  REQUIRE_FALSE(report.checks.empty());
  CHECK(report.checks[0].name == "cost_stationarity");
  // Any observed cost descent must stay within quadrature noise.
  CHECK(report.checks[0].max_abs_error <= 1e-8);
  CHECK(report.checks[0].samples > 0);
}

TEST_CASE("verification report serializes to well-formed json") {
  const BuiltinModel model = builtin("heisenberg");
  VerifyOptions opts;
  opts.samples = 10;
  VerificationReport report = check_frame(model.frame, model.chart_box, opts);
  report.subject = "frame";
  const std::string json = report.to_json();
  CHECK(json.find("\"subject\"") != std::string::npos);
  CHECK(json.find("\"seed\"") != std::string::npos);
  CHECK(json.find("\"checks\"") != std::string::npos);
  CHECK(json.find("psi_phi_identity") != std::string::npos);
  CHECK(json.find("\"pass\"") != std::string::npos);
}

TEST_CASE("merging reports prefixes the subject") {
  VerificationReport a, b;
  a.subject = "left";
  CheckResult c;
  c.name = "x";
  c.pass = true;
  b.subject = "right";
  b.checks.push_back(c);
  a.merge(b);
  REQUIRE(a.checks.size() == 1);
  CHECK(a.checks[0].name == "right/x");
  CHECK(a.all_pass());

  CheckResult bad;
  bad.name = "y";
  bad.pass = false;
  b.checks.push_back(bad);
  a.merge(b);
  CHECK_FALSE(a.all_pass());
}

TEST_CASE("verify_model aggregates every applicable suite") {
  VerifyOptions opts;
  opts.samples = 30;
  const BuiltinModel model = builtin("vertical_disc_dyn");
  const VerificationReport report = verify_model(model, opts);
  CHECK(report.all_pass());
  bool saw_frame = false, saw_mech = false, saw_dyn = false;
  for (const auto& c : report.checks) {
    if (c.name.find("frame/") != std::string::npos) saw_frame = true;
    if (c.name.find("mechanics") != std::string::npos) saw_mech = true;
    if (c.name.find("dynamic") != std::string::npos) saw_dyn = true;
  }
  CHECK(saw_frame);
  CHECK(saw_mech);
  CHECK(saw_dyn);
}
