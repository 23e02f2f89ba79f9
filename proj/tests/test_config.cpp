#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hamel/config.hpp"

using namespace hamel;

TEST_CASE("toml subset: scalars, strings, booleans, arrays, comments") {
  const TomlTable t = TomlTable::parse(R"(
# top-level comment
title = "steering run"   # trailing comment
count = 42
ratio = -1.5e-2
flag = true
other = false

[problem]
model = "heisenberg"
q0 = [0.0, 0.0, 0.0]
q1 = [0, 0, 1]
labels = ["a", "b"]
)");
  CHECK(t.get_string("title") == "steering run");
  CHECK(t.get_number("count") == 42.0);
  CHECK(t.get_number("ratio") == doctest::Approx(-0.015));
  CHECK(t.get_bool("flag"));
  CHECK_FALSE(t.get_bool("other"));
  CHECK(t.get_string("problem.model") == "heisenberg");
  const auto q1 = t.get_number_array("problem.q1");
  REQUIRE(q1.size() == 3);
  CHECK(q1[2] == 1.0);
  CHECK(t.has("problem.q0"));
  CHECK_FALSE(t.has("problem.missing"));
}

TEST_CASE("toml subset: hash inside a quoted string survives") {
  const TomlTable t = TomlTable::parse("name = \"a # b\"\n");
  CHECK(t.get_string("name") == "a # b");
}

TEST_CASE("toml errors carry line numbers") {
  auto expect_line = [](const std::string& text, const std::string& needle) {
    try {
      TomlTable::parse(text);
      FAIL_CHECK("expected InvalidProblem for: " << text);
    } catch (const InvalidProblem& e) {
      const std::string what = e.what();
      CHECK(what.find("line") != std::string::npos);
      CHECK(what.find(needle) != std::string::npos);
    }
  };
  expect_line("x 3\n", "key = value");                // missing '='
  expect_line("a = 1\na = 2\n", "duplicate");         // duplicate key
  expect_line("t = { a = 1 }\n", "inline");           // inline table
  expect_line("v = [\"x\", 1]\n", "array");           // mixed array
  expect_line("n = 12abc\n", "not a number");         // malformed number
  expect_line("[a.b]\nk = 1\n", "tables");            // nested table
}

TEST_CASE("missing and mistyped keys throw") {
  const TomlTable t = TomlTable::parse("a = 1\nb = \"two\"\n");
  CHECK_THROWS_AS(t.get_number("missing"), InvalidProblem);
  CHECK_THROWS_AS(t.get_number("b"), InvalidProblem);
  CHECK_THROWS_AS(t.get_bool("a"), InvalidProblem);
  CHECK(t.get_number_or("missing", 7.0) == 7.0);
  CHECK(t.get_string_or("missing", "dflt") == "dflt");
}

TEST_CASE("scenario config resolves a named scenario untouched") {
  const TomlTable t = TomlTable::parse(R"(
[problem]
model = "vertical_disc_kin"
scenario = "roll"
)");
  const ScenarioConfig cfg = ScenarioConfig::from_toml(t);
  CHECK(cfg.model == "vertical_disc_kin");
  const BuiltinModel model = builtin(cfg.model, cfg.params);
  const Scenario sc = cfg.resolve(model);
  CHECK(sc.name == "roll");
  CHECK(sc.layout == Layout::kinematic_oc);
  const Scenario& want = model.scenario("roll");
  CHECK((sc.bc.q1 - want.bc.q1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sc.config.steps == want.config.steps);
}

TEST_CASE("flag-style overrides beat the named scenario") {
  const TomlTable t = TomlTable::parse(R"(
[problem]
model = "heisenberg"
scenario = "steer_z"
q1 = [0.0, 0.0, 2.0]

[solver]
steps = 320
tol = 1e-8
restarts = 2
serial = true
)");
  const ScenarioConfig cfg = ScenarioConfig::from_toml(t);
  const BuiltinModel model = builtin(cfg.model, cfg.params);
  // The stored scenario carries a frozen guess for its own boundary data.
  CHECK(model.scenario("steer_z").guess.size() == 3);
  const Scenario sc = cfg.resolve(model);
  CHECK(sc.bc.q1(2) == 2.0);
  CHECK(sc.config.steps == 320);
  CHECK(sc.config.newton_tol == 1e-8);
  CHECK(sc.config.restarts == 2);
  CHECK_FALSE(sc.config.parallel_jacobian);
  // Boundary overrides invalidate that guess: the solver falls back to the
  // interpolation policy instead of steering toward a stale branch.
  CHECK(sc.guess.size() == 0);

  // Without boundary overrides the frozen guess survives.
  const TomlTable plain = TomlTable::parse(R"(
[problem]
model = "heisenberg"
scenario = "steer_z"
)");
  const Scenario keep = ScenarioConfig::from_toml(plain).resolve(model);
  CHECK(keep.guess.size() == 3);
}

TEST_CASE("custom problems require full boundary data") {
  const TomlTable t = TomlTable::parse(R"(
[problem]
model = "heisenberg"
layout = "kinematic"
q0 = [0, 0, 0]
)");
  const ScenarioConfig cfg = ScenarioConfig::from_toml(t);
  const BuiltinModel model = builtin(cfg.model, cfg.params);
  CHECK_THROWS_AS(cfg.resolve(model), InvalidProblem);
}

TEST_CASE("custom dynamic problems default to rest endpoints when omitted") {
  const TomlTable t = TomlTable::parse(R"(
[problem]
model = "sphere_dyn"
layout = "dynamic"
q0 = [0, 0, 0]
q1 = [0.3, -0.2, 0.1]
)");
  const ScenarioConfig cfg = ScenarioConfig::from_toml(t);
  const BuiltinModel model = builtin(cfg.model, cfg.params);
  const Scenario sc = cfg.resolve(model);
  CHECK(sc.layout == Layout::dynamic_oc);
  REQUIRE(sc.bc.u0.has_value());
  REQUIRE(sc.bc.u1.has_value());
  CHECK(sc.bc.u0->cwiseAbs().maxCoeff() == 0.0);
  CHECK(sc.bc.u1->cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("layout defaults to the model's supported problem") {
  const TomlTable kin = TomlTable::parse(R"(
[problem]
model = "heisenberg"
q0 = [0, 0, 0]
q1 = [0, 0, 1]
)");
  const ScenarioConfig kin_cfg = ScenarioConfig::from_toml(kin);
  const BuiltinModel hm = builtin("heisenberg");
  CHECK(kin_cfg.resolve(hm).layout == Layout::kinematic_oc);

  const TomlTable dyn = TomlTable::parse(R"(
[problem]
model = "sphere_dyn"
q0 = [0, 0, 0]
q1 = [1, 0, 0]
)");
  const ScenarioConfig dyn_cfg = ScenarioConfig::from_toml(dyn);
  const BuiltinModel ball = builtin("sphere_dyn");
  CHECK(dyn_cfg.resolve(ball).layout == Layout::dynamic_oc);
}

TEST_CASE("solving the mechanics layout is rejected") {
  const TomlTable t = TomlTable::parse(R"(
[problem]
model = "rigid_body_dyn"
layout = "mechanics"
q0 = [0, 0, 0]
q1 = [1, 0, 0]
)");
  const ScenarioConfig cfg = ScenarioConfig::from_toml(t);
  const BuiltinModel model = builtin(cfg.model);
  CHECK_THROWS_AS(cfg.resolve(model), InvalidProblem);
}

TEST_CASE("model parameters pass through the config") {
  const TomlTable t = TomlTable::parse(R"(
[problem]
model = "falling_disc_kin"
scenario = "reorient"

[params]
r = 2.0
)");
  const ScenarioConfig cfg = ScenarioConfig::from_toml(t);
  REQUIRE(cfg.params.count("r"));
  CHECK(cfg.params.at("r") == 2.0);
  // The parametrized model accepts them.
  const BuiltinModel model = builtin(cfg.model, cfg.params);
  CHECK_NOTHROW(cfg.resolve(model));
}

TEST_CASE("output settings are picked up") {
  const TomlTable t = TomlTable::parse(R"(
[problem]
model = "heisenberg"
scenario = "steer_z"

[output]
path = "run.json"
format = "json"
)");
  const ScenarioConfig cfg = ScenarioConfig::from_toml(t);
  CHECK(cfg.out_path == "run.json");
  CHECK(cfg.format == "json");
}

TEST_CASE("unknown output format is rejected at parse time") {
  const TomlTable t = TomlTable::parse(R"(
[problem]
model = "heisenberg"

[output]
format = "yaml"
)");
  CHECK_THROWS_AS(ScenarioConfig::from_toml(t), InvalidProblem);
}
