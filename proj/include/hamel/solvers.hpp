#pragma once

#include "hamel/assembly.hpp"

namespace hamel {

/** Uniform-grid trajectory; states.size() == steps + 1. */
struct Trajectory {
  Layout layout = Layout::kinematic_oc;
  std::vector<double> times;
  std::vector<Vec> states;

  int steps() const { return static_cast<int>(states.size()) - 1; }
  double t0() const { return times.front(); }
  double t1() const { return times.back(); }
};

using RhsFn = std::function<Vec(double t, const Vec& x)>;

/** Classical fixed-step fourth-order Runge-Kutta.  RHS errors are rethrown
 *  with the failing step index and time attached. */
Trajectory integrate(const RhsFn& rhs, const Vec& x0, double t0, double t1,
                     int steps, Layout layout = Layout::kinematic_oc);

struct ShootingConfig {
  int steps = 200;            // >= 16
  double newton_tol = 1e-9;   // infinity norm of the residual
  int max_iters = 50;
  double fd_step = 1e-6;      // Jacobian column step, scaled per coordinate
  double damping_factor = 0.5;
  double min_step = 9.5367431640625e-7;  // 2^-20
  int restarts = 8;           // random restarts after a failed base attempt
  uint64_t seed = kDefaultSeed;
  bool parallel_jacobian = true;
};

struct ShootResult {
  Trajectory trajectory;      // fresh integration from the converged unknowns
  Vec unknowns;
  double residual_norm = 0.0;
  int iterations = 0;
  int restarts_used = 0;
  std::vector<double> jacobian_singular_values;  // at the solution
  int degenerate_directions = 0;  // singular values < 1e-10 * sigma_max
};

/** Single shooting for the kinematic reduction.  Unknowns (u_free(t0), mu(t0)),
 *  residual q(t1) - q1.  Empty guess selects the default policy: free
 *  components of Psi(q0)(q1-q0)/T and zero mu.  Throws NoConvergence (with
 *  the best residual seen) after the restart sweep fails. */
ShootResult shoot_kinematic(const KinematicOCP& ocp,
                            const BoundaryConditions& bc, const Vec& guess,
                            const ShootingConfig& config = {});

/** Single shooting for the dynamic reduction.  Unknowns
 *  (a_free(t0), j_free(t0), mu(t0)), residual (q(t1)-q1, u_free(t1)-u1).
 *  Empty guess: a = (u1-u0)/T, j = 0, mu = 0. */
ShootResult shoot_dynamic(const DynamicOCP& ocp, const BoundaryConditions& bc,
                          const Vec& guess, const ShootingConfig& config = {});

/** Integrate the reduced field from boundary data and packed shooting
 *  unknowns (same packing as the shooters) at an arbitrary step count;
 *  used for grid-refinement checks and best-effort output. */
Trajectory integrate_kinematic(const KinematicOCP& ocp,
                               const BoundaryConditions& bc,
                               const Vec& unknowns, int steps);
Trajectory integrate_dynamic(const DynamicOCP& ocp,
                             const BoundaryConditions& bc, const Vec& unknowns,
                             int steps);

/** Composite-Simpson quadrature of the cost integrand along a trajectory
 *  (3/8 rule on the last panel when the step count is odd). */
double evaluate_cost(const KinematicOCP& ocp, const Trajectory& traj);
double evaluate_cost(const DynamicOCP& ocp, const Trajectory& traj);

/** Threshold separating degenerate shooting directions, relative to the
 *  largest singular value. */
inline constexpr double kDegenerateDirectionRatio = 1e-10;

}  // namespace hamel
