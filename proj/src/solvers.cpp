#include "hamel/solvers.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <random>

#include "hamel/parallel.hpp"

namespace hamel {

Trajectory integrate(const RhsFn& rhs, const Vec& x0, double t0, double t1,
                     int steps, Layout layout) {
  if (steps < 1)
    throw InvalidProblem(fmt::format("integrate: steps = {} (need >= 1)", steps));
  if (!(t1 > t0))
    throw InvalidProblem(
        fmt::format("integrate: empty time window [{}, {}]", t0, t1));
  if (!x0.allFinite())
    throw InvalidProblem("integrate: non-finite initial state");

  Trajectory traj;
  traj.layout = layout;
  traj.times.reserve(static_cast<size_t>(steps) + 1);
  traj.states.reserve(static_cast<size_t>(steps) + 1);
  const double h = (t1 - t0) / steps;

  Vec x = x0;
  traj.times.push_back(t0);
  traj.states.push_back(x);
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * h;
    try {
      const Vec k1 = rhs(t, x);
      const Vec k2 = rhs(t + 0.5 * h, x + (0.5 * h) * k1);
      const Vec k3 = rhs(t + 0.5 * h, x + (0.5 * h) * k2);
      const Vec k4 = rhs(t + h, x + h * k3);
      x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (Error& e) {
      e.add_context(fmt::format("integration step {}/{} at t = {:.6g}", i + 1,
                                steps, t));
      throw;
    }
    if (!x.allFinite())
      throw InvalidProblem(fmt::format(
          "integration produced a non-finite state at step {}/{}, t = {:.6g}",
          i + 1, steps, t + h));
    traj.times.push_back(i + 1 == steps ? t1 : t0 + (i + 1) * h);
    traj.states.push_back(x);
  }
  return traj;
}

Trajectory integrate_kinematic(const KinematicOCP& ocp,
                               const BoundaryConditions& bc,
                               const Vec& unknowns, int steps) {
  const StateLayout lay(Layout::kinematic_oc, ocp.frame.dof(),
                        ocp.frame.constraint_count());
  if (unknowns.size() != lay.f + lay.m)
    throw InvalidProblem(fmt::format(
        "integrate_kinematic: unknowns length {}, expected {} (u_free, mu)",
        unknowns.size(), lay.f + lay.m));
  Vec x0(lay.size());
  x0.segment(0, lay.n) = bc.q0;
  x0.segment(lay.u_offset(), lay.f) = unknowns.segment(0, lay.f);
  x0.segment(lay.mu_offset(), lay.m) = unknowns.segment(lay.f, lay.m);
  return integrate([&](double, const Vec& x) { return kinematic_rhs(ocp, x); },
                   x0, bc.t0, bc.t1, steps, Layout::kinematic_oc);
}

Trajectory integrate_dynamic(const DynamicOCP& ocp,
                             const BoundaryConditions& bc, const Vec& unknowns,
                             int steps) {
  const StateLayout lay(Layout::dynamic_oc, ocp.frame.dof(),
                        ocp.frame.constraint_count());
  if (unknowns.size() != 2 * lay.f + lay.m)
    throw InvalidProblem(fmt::format(
        "integrate_dynamic: unknowns length {}, expected {} (a_free, j_free, mu)",
        unknowns.size(), 2 * lay.f + lay.m));
  if (!bc.u0 || bc.u0->size() != lay.f)
    throw InvalidProblem("integrate_dynamic: u0 with one entry per free slot required");
  Vec x0(lay.size());
  x0.segment(0, lay.n) = bc.q0;
  x0.segment(lay.u_offset(), lay.f) = *bc.u0;
  x0.segment(lay.a_offset(), lay.f) = unknowns.segment(0, lay.f);
  x0.segment(lay.j_offset(), lay.f) = unknowns.segment(lay.f, lay.f);
  x0.segment(lay.mu_offset(), lay.m) = unknowns.segment(2 * lay.f, lay.m);
  return integrate([&](double, const Vec& x) { return dynamic_rhs(ocp, x); },
                   x0, bc.t0, bc.t1, steps, Layout::dynamic_oc);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/** One shooting problem: map unknowns to a trajectory and an endpoint
 *  residual of the same dimension. */
struct ShootProblem {
  std::function<Trajectory(const Vec&)> flow;
  std::function<Vec(const Trajectory&)> endpoint;
};

struct Best {
  double rnorm = kInf;
  Vec x;
};

struct Attempt {
  bool ok = false;
  Vec x;
  Trajectory traj;
  double rnorm = kInf;
  int iterations = 0;
};

/** SVD of one shooting Jacobian.  baseline_rank counts directions above the
 *  degeneracy cut; step(r, rank) is the least-squares Newton step restricted
 *  to the leading `rank` singular directions. */
struct SvdSystem {
  Eigen::JacobiSVD<Mat> svd;
  Vec s;
  int baseline_rank = 0;
  int degenerate = 0;

  Vec step(const Vec& r, int rank) const {
    Vec y = svd.matrixU().transpose() * (-r);
    for (int i = 0; i < y.size(); ++i) {
      if (i < rank)
        y(i) /= s(i);
      else
        y(i) = 0.0;
    }
    return svd.matrixV() * y;
  }
};

SvdSystem factor_jacobian(const Mat& jac) {
  if (!jac.allFinite())
    throw SingularJacobian("shooting Jacobian has non-finite entries");
  SvdSystem sys;
  sys.svd.compute(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
  sys.s = sys.svd.singularValues();
  const double smax = sys.s.size() ? sys.s(0) : 0.0;
  if (!(smax > 0.0))
    throw SingularJacobian("shooting Jacobian is identically zero");
  const double cut = kDegenerateDirectionRatio * smax;
  for (int i = 0; i < sys.s.size(); ++i)
    if (sys.s(i) > cut) ++sys.baseline_rank;
  sys.degenerate = static_cast<int>(sys.s.size()) - sys.baseline_rank;
  return sys;
}

/** Damped Newton on the shooting residual; best tracks the lowest residual
 *  across all attempts for the NoConvergence report. */
Attempt newton_attempt(const ShootProblem& problem, const Vec& start,
                       const ShootingConfig& config, Best& best,
                       int& total_iterations) {
  Attempt at;
  at.x = start;

  auto residual_of = [&](const Vec& x, Trajectory& traj_out) -> Vec {
    traj_out = problem.flow(x);
    return problem.endpoint(traj_out);
  };
  auto note_best = [&] {
    if (at.rnorm < best.rnorm) {
      best.rnorm = at.rnorm;
      best.x = at.x;
    }
  };

  Vec r = residual_of(at.x, at.traj);
  at.rnorm = r.cwiseAbs().maxCoeff();
  note_best();

  for (int iter = 0; iter < config.max_iters; ++iter) {
    if (at.rnorm <= config.newton_tol) {
      at.ok = true;
      return at;
    }

    auto F = [&](const Vec& x) {
      Trajectory t;
      return residual_of(x, t);
    };
    const Mat jac =
        fd_jacobian(F, at.x, r, config.fd_step, config.parallel_jacobian);
    const SvdSystem sys = factor_jacobian(jac);

    // Line search over the full-rank step first.  A step that only crawls
    // (weak contraction) or fails outright near a symmetry orbit means the
    // smallest singular values are finite-difference noise: drop the weakest
    // direction and retry, taking the first rank that contracts decisively,
    // else the best accepted step over all ranks.  Degeneracy is reported,
    // never silently regularized.
    struct Step {
      Vec x, r;
      Trajectory traj;
      double rnorm = kInf, t = 0.0;
      int rank = 0;
      bool ok = false;
    };
    Step chosen;
    for (int rank = sys.baseline_rank; rank >= 1; --rank) {
      if (rank < sys.baseline_rank)
        log_debug(fmt::format(
            "newton: retrying with rank {} of {} (dropped sigma {:.3e})", rank,
            sys.baseline_rank, sys.s(rank)));
      const Vec dx = sys.step(r, rank);
      Step cand;
      for (double t = 1.0; t >= config.min_step; t *= config.damping_factor) {
        const Vec trial = at.x + t * dx;
        double trial_norm = kInf;
        Trajectory trial_traj;
        Vec trial_r;
        try {
          trial_r = residual_of(trial, trial_traj);
          trial_norm = trial_r.cwiseAbs().maxCoeff();
        } catch (const Error&) {
          trial_norm = kInf;  // treat a blown-up trial as a rejected step
        }
        if (trial_norm <= (1.0 - 1e-4 * t) * at.rnorm) {
          cand = Step{trial, std::move(trial_r), std::move(trial_traj),
                      trial_norm, t, rank, true};
          break;
        }
      }
      if (cand.ok && cand.rnorm < chosen.rnorm) chosen = std::move(cand);
      if (chosen.ok && chosen.rank == rank && chosen.rnorm <= 0.9 * at.rnorm)
        break;  // decisive contraction at this rank
    }
    ++at.iterations;
    ++total_iterations;
    if (chosen.ok) {
      at.x = std::move(chosen.x);
      at.traj = std::move(chosen.traj);
      r = std::move(chosen.r);
      at.rnorm = chosen.rnorm;
    }
    note_best();
    log_debug(fmt::format(
        "newton iter {}: residual {:.3e}, step {:.3e}{}{}", at.iterations,
        at.rnorm, chosen.t,
        chosen.ok && chosen.rank < sys.baseline_rank
            ? fmt::format(" (rank {} of {})", chosen.rank, sys.baseline_rank)
            : "",
        sys.degenerate
            ? fmt::format(", {} degenerate direction(s)", sys.degenerate)
            : ""));
    if (!chosen.ok) return at;  // line search exhausted at every rank
  }
  at.ok = at.rnorm <= config.newton_tol;
  return at;
}

ShootResult run_shooting(const ShootProblem& problem, const Vec& start,
                         const ShootingConfig& config, const char* what) {
  if (config.steps < 16)
    throw InvalidProblem(
        fmt::format("{}: steps = {} (need >= 16)", what, config.steps));

  Best best;
  int total_iterations = 0;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double scale =
      std::max(1.0, start.size() ? start.cwiseAbs().maxCoeff() : 1.0);

  for (int attempt = 0; attempt <= config.restarts; ++attempt) {
    Vec x0 = start;
    if (attempt > 0)
      for (int i = 0; i < x0.size(); ++i) x0(i) += scale * unit(rng);

    Attempt at;
    try {
      at = newton_attempt(problem, x0, config, best, total_iterations);
    } catch (const Error& e) {
      log_info(fmt::format("{}: attempt {} abandoned: {}", what, attempt,
                           e.what()));
      continue;
    }
    if (!at.ok) {
      log_info(fmt::format("{}: attempt {} stalled at residual {:.3e}", what,
                           attempt, at.rnorm));
      continue;
    }

    ShootResult result;
    result.unknowns = at.x;
    result.residual_norm = at.rnorm;
    result.iterations = at.iterations;
    result.restarts_used = attempt;
    result.trajectory = std::move(at.traj);
    try {
      // Fresh Jacobian at the solution for the degeneracy diagnostics.
      auto F = [&](const Vec& x) {
        const Trajectory t = problem.flow(x);
        return problem.endpoint(t);
      };
      const Vec r = problem.endpoint(result.trajectory);
      const Mat jac =
          fd_jacobian(F, at.x, r, config.fd_step, config.parallel_jacobian);
      const SvdSystem sys = factor_jacobian(jac);
      result.jacobian_singular_values.assign(sys.s.data(),
                                             sys.s.data() + sys.s.size());
      result.degenerate_directions = sys.degenerate;
    } catch (const Error& e) {
      log_info(fmt::format("{}: solution diagnostics unavailable: {}", what,
                           e.what()));
    }
    log_info(fmt::format(
        "{}: converged, residual {:.3e}, {} iteration(s), {} restart(s)", what,
        result.residual_norm, result.iterations, result.restarts_used));
    return result;
  }

  NoConvergence err(
      fmt::format("{}: no convergence after {} attempt(s); best residual {:.3e}",
                  what, config.restarts + 1, best.rnorm),
      best.rnorm, total_iterations);
  err.best_unknowns = best.x;
  throw err;
}

}  // namespace

ShootResult shoot_kinematic(const KinematicOCP& ocp,
                            const BoundaryConditions& bc, const Vec& guess,
                            const ShootingConfig& config) {
  KinematicOCP bound = ocp;
  bound.bc = bc;
  validate_or_throw(bound);

  const QuasiFrame& frame = ocp.frame;
  const int f = frame.free_count(), m = frame.constraint_count();
  const double T = bc.t1 - bc.t0;

  Vec start;
  if (guess.size() == 0) {
    // Interpolation policy: free components of Psi(q0)(q1 - q0)/T, zero mu.
    const Vec u_full = frame.psi_at(bc.q0) * ((bc.q1 - bc.q0) / T);
    start = Vec::Zero(f + m);
    start.segment(0, f) = frame.free_from_full(u_full);
  } else if (guess.size() == f + m) {
    start = guess;
  } else {
    throw InvalidProblem(fmt::format(
        "shoot_kinematic: guess length {}, expected {} (u_free, mu)",
        guess.size(), f + m));
  }

  ShootProblem problem;
  problem.flow = [&](const Vec& unknowns) {
    return integrate_kinematic(bound, bc, unknowns, config.steps);
  };
  problem.endpoint = [&](const Trajectory& traj) {
    return Vec(traj.states.back().segment(0, frame.dof()) - bc.q1);
  };
  return run_shooting(problem, start, config, "shoot_kinematic");
}

ShootResult shoot_dynamic(const DynamicOCP& ocp, const BoundaryConditions& bc,
                          const Vec& guess, const ShootingConfig& config) {
  DynamicOCP bound = ocp;
  bound.bc = bc;
  validate_or_throw(bound);

  const QuasiFrame& frame = ocp.frame;
  const int n = frame.dof(), f = frame.free_count(), m = frame.constraint_count();
  const double T = bc.t1 - bc.t0;

  Vec start;
  if (guess.size() == 0) {
    // Ramp policy: accelerate linearly between the endpoint velocities.
    start = Vec::Zero(2 * f + m);
    start.segment(0, f) = (*bc.u1 - *bc.u0) / T;
  } else if (guess.size() == 2 * f + m) {
    start = guess;
  } else {
    throw InvalidProblem(fmt::format(
        "shoot_dynamic: guess length {}, expected {} (a_free, j_free, mu)",
        guess.size(), 2 * f + m));
  }

  ShootProblem problem;
  problem.flow = [&](const Vec& unknowns) {
    return integrate_dynamic(bound, bc, unknowns, config.steps);
  };
  problem.endpoint = [&](const Trajectory& traj) {
    const Vec& xe = traj.states.back();
    Vec r(n + f);
    r.segment(0, n) = xe.segment(0, n) - bc.q1;
    r.segment(n, f) = xe.segment(n, f) - *bc.u1;
    return r;
  };
  return run_shooting(problem, start, config, "shoot_dynamic");
}

namespace {

/** Composite Simpson over the uniform grid, 3/8 rule on the final three
 *  panels when the count is odd (plain trapezoid for a single panel). */
double quadrature(const std::vector<double>& g, double h) {
  const int steps = static_cast<int>(g.size()) - 1;
  if (steps == 1) return 0.5 * h * (g[0] + g[1]);
  double acc = 0.0;
  const int simpson_end = (steps % 2 == 0) ? steps : steps - 3;
  for (int k = 0; k + 2 <= simpson_end; k += 2)
    acc += (h / 3.0) * (g[k] + 4.0 * g[k + 1] + g[k + 2]);
  if (steps % 2 != 0) {
    const int k = steps - 3;
    acc += (3.0 * h / 8.0) *
           (g[k] + 3.0 * g[k + 1] + 3.0 * g[k + 2] + g[k + 3]);
  }
  return acc;
}

void check_traj(const Trajectory& traj, Layout expected, const char* what) {
  if (traj.layout != expected)
    throw InvalidProblem(fmt::format("{}: trajectory has {} layout, expected {}",
                                     what, layout_name(traj.layout),
                                     layout_name(expected)));
  if (traj.states.size() < 2 || traj.states.size() != traj.times.size())
    throw InvalidProblem(fmt::format("{}: malformed trajectory", what));
}

}  // namespace

double evaluate_cost(const KinematicOCP& ocp, const Trajectory& traj) {
  check_traj(traj, Layout::kinematic_oc, "evaluate_cost");
  const StateLayout lay(Layout::kinematic_oc, ocp.frame.dof(),
                        ocp.frame.constraint_count());
  std::vector<double> g;
  g.reserve(traj.states.size());
  for (const Vec& x : traj.states)
    g.push_back(ocp.cost.value(lay.q(x), lay.u(x)));
  const double h = (traj.t1() - traj.t0()) / traj.steps();
  return quadrature(g, h);
}

double evaluate_cost(const DynamicOCP& ocp, const Trajectory& traj) {
  check_traj(traj, Layout::dynamic_oc, "evaluate_cost");
  const StateLayout lay(Layout::dynamic_oc, ocp.frame.dof(),
                        ocp.frame.constraint_count());
  std::vector<double> g;
  g.reserve(traj.states.size());
  for (const Vec& x : traj.states)
    g.push_back(ocp.cost.value(lay.q(x), lay.u(x), lay.a(x)));
  const double h = (traj.t1() - traj.t0()) / traj.steps();
  return quadrature(g, h);
}

}  // namespace hamel
