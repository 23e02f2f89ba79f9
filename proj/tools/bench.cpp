#include <fmt/format.h>

#include <chrono>

#include "hamel/parallel.hpp"
#include "hamel/verify.hpp"

namespace {

using namespace hamel;

double best_ms(const std::function<void()>& fn, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(
        best, std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return best;
}

void row(const std::string& name, double serial_ms, double parallel_ms,
         bool identical) {
  fmt::print("{:<28} {:>10.1f} {:>10.1f} {:>8.2f}x {:>10}\n", name, serial_ms,
             parallel_ms, serial_ms / parallel_ms,
             identical ? "bitwise" : "DIFFERS");
}

}  // namespace

int main() {
  fmt::print("threads: {} (OpenMP {})\n\n", max_threads(),
             openmp_enabled() ? "enabled" : "disabled");
  fmt::print("{:<28} {:>10} {:>10} {:>9} {:>10}\n", "kernel", "serial ms",
             "openmp ms", "speedup", "check");

  // Shooting Jacobian: one finite-difference column per unknown, each a full
  // trajectory integration.
  {
    const BuiltinModel model = builtin("sphere_dyn");
    const Scenario& sc = model.scenario("reorient");
    const int f = model.frame.free_count();
    auto F = [&](const Vec& unknowns) {
      const Trajectory traj =
          integrate_dynamic(*model.dynamic, sc.bc, unknowns, 400);
      const Vec& xe = traj.states.back();
      Vec r(model.frame.dof() + f);
      r.segment(0, model.frame.dof()) =
          xe.segment(0, model.frame.dof()) - sc.bc.q1;
      r.segment(model.frame.dof(), f) =
          xe.segment(model.frame.dof(), f) - *sc.bc.u1;
      return r;
    };
    const Vec x = Vec::Zero(2 * f);
    const Vec Fx = F(x);
    Mat serial, parallel;
    const double t_serial =
        best_ms([&] { serial = fd_jacobian(F, x, Fx, 1e-6, false); });
    const double t_parallel =
        best_ms([&] { parallel = fd_jacobian(F, x, Fx, 1e-6, true); });
    row("shooting jacobian (6 col)", t_serial, t_parallel,
        (serial.array() == parallel.array()).all());
  }

  // Verification sweep: independent random-state oracle comparisons.
  {
    const BuiltinModel model = builtin("rigid_body_dyn");
    VerifyOptions opts;
    opts.samples = 2000;
    VerificationReport rs, rp;
    opts.parallel = false;
    const double t_serial =
        best_ms([&] { rs = compare_rhs(model, Layout::dynamic_oc, opts); });
    opts.parallel = true;
    const double t_parallel =
        best_ms([&] { rp = compare_rhs(model, Layout::dynamic_oc, opts); });
    row("oracle sweep (2000 states)", t_serial, t_parallel,
        rs.checks.front().max_abs_error == rp.checks.front().max_abs_error);
  }

  // Frame check sweep across sampled configurations.
  {
    const BuiltinModel model = builtin("falling_disc_kin");
    VerifyOptions opts;
    opts.samples = 2000;
    VerificationReport rs, rp;
    opts.parallel = false;
    const double t_serial =
        best_ms([&] { rs = check_frame(model.frame, model.chart_box, opts); });
    opts.parallel = true;
    const double t_parallel =
        best_ms([&] { rp = check_frame(model.frame, model.chart_box, opts); });
    bool same = rs.checks.size() == rp.checks.size();
    for (size_t i = 0; same && i < rs.checks.size(); ++i)
      same = rs.checks[i].max_abs_error == rp.checks[i].max_abs_error;
    row("frame checks (2000 pts)", t_serial, t_parallel, same);
  }
  return 0;
}
