#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>

#include "hamel/parallel.hpp"

using namespace hamel;

namespace {

Vec quadratic_map(const Vec& x) {
  Vec y(3);
  y(0) = x(0) * x(0) + 2.0 * x(1);
  y(1) = std::sin(x(1)) - x(2);
  y(2) = x(0) * x(1) * x(2);
  return y;
}

}  // namespace

TEST_CASE("thread introspection is consistent") {
  CHECK(max_threads() >= 1);
  if (!openmp_enabled()) CHECK(max_threads() == 1);
}

TEST_CASE("fd jacobian approximates the analytic jacobian") {
  const Vec x = (Vec(3) << 0.5, -0.3, 0.8).finished();
  const Vec fx = quadratic_map(x);
  const Mat jac = fd_jacobian(quadratic_map, x, fx, 1e-7, false);

  Mat want(3, 3);
  want << 2.0 * x(0), 2.0, 0.0,
          0.0, std::cos(x(1)), -1.0,
          x(1) * x(2), x(0) * x(2), x(0) * x(1);
  CHECK((jac - want).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("fd jacobian scales the step with the coordinate magnitude") {
  // At |x_k| = 1000 an unscaled absolute step would lose every digit.
  auto f = [](const Vec& x) {
    Vec y(1);
    y(0) = x(0) * x(0);
    return y;
  };
  const Vec x = Vec::Constant(1, 1000.0);
  // A 1e-12 base step is hopeless unscaled; the coordinate scaling keeps
  // the forward difference well above rounding.
  const Mat jac = fd_jacobian(f, x, f(x), 1e-12, false);
  CHECK(std::abs(jac(0, 0) - 2000.0) < 1.0);
}

TEST_CASE("serial and parallel jacobians agree bitwise") {
  const Vec x = (Vec(3) << 1.2, -0.7, 0.4).finished();
  const Vec fx = quadratic_map(x);
  const Mat serial = fd_jacobian(quadratic_map, x, fx, 1e-6, false);
  const Mat parallel = fd_jacobian(quadratic_map, x, fx, 1e-6, true);
  CHECK((serial.array() == parallel.array()).all());
}

TEST_CASE("map_indexed matches a plain loop in both modes") {
  auto fn = [](int i) { return std::sqrt(static_cast<double>(i)) - 0.5 * i; };
  const auto serial = map_indexed(100, fn, false);
  const auto parallel = map_indexed(100, fn, true);
  REQUIRE(serial.size() == 100);
  REQUIRE(parallel.size() == 100);
  for (int i = 0; i < 100; ++i) {
    CHECK(serial[i] == fn(i));
    CHECK(serial[i] == parallel[i]);
  }
}

TEST_CASE("map_indexed rethrows the lowest-index failure") {
  for (bool parallel : {false, true}) {
    CAPTURE(parallel);
    std::atomic<int> calls{0};
    auto fn = [&](int i) -> double {
      calls.fetch_add(1);
      if (i == 17 || i == 63)
        throw InvalidProblem("slot " + std::to_string(i) + " failed");
      return static_cast<double>(i);
    };
    try {
      map_indexed(100, fn, parallel);
      FAIL("expected InvalidProblem");
    } catch (const InvalidProblem& e) {
      // Deterministic choice: the lowest failing index wins.
      CHECK(std::string(e.what()).find("slot 17") != std::string::npos);
    }
  }
}

TEST_CASE("map_indexed handles an empty range") {
  auto fn = [](int) { return 1.0; };
  CHECK(map_indexed(0, fn, true).empty());
  CHECK(map_indexed(0, fn, false).empty());
}
