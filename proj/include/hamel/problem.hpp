#pragma once

#include <functional>
#include <optional>

#include "hamel/frame.hpp"

namespace hamel {

/** Cost integrand C(q, u) for kinematic optimal control problems, where u
 *  holds the free quasi-velocities only.  Partial-derivative suppliers are
 *  optional; absent ones are filled by central finite differences with step
 *  fd_step * max(1, |x|) per coordinate. */
struct CostKinematic {
  std::function<double(const Vec& q, const Vec& u)> value;

  std::function<Vec(const Vec& q, const Vec& u)> dq;        // n
  std::function<Vec(const Vec& q, const Vec& u)> du;        // n-m
  std::function<Mat(const Vec& q, const Vec& u)> hess_uu;   // (n-m)x(n-m)
  std::function<Mat(const Vec& q, const Vec& u)> hess_uq;   // (n-m)xn
  double fd_step = 1e-5;
};

/** All first/second-order data of a kinematic cost at one point. */
struct KinematicCostData {
  double value;
  Vec dq, du;
  Mat hess_uu, hess_uq;
};

KinematicCostData cost_data_at(const CostKinematic& cost, const Vec& q,
                               const Vec& u);

/** Cost integrand C(q, u, a) for dynamic optimal control problems; u and a
 *  hold free slots only.  Same finite-difference fallback convention. */
struct CostDynamic {
  std::function<double(const Vec& q, const Vec& u, const Vec& a)> value;

  std::function<Vec(const Vec& q, const Vec& u, const Vec& a)> dq;
  std::function<Vec(const Vec& q, const Vec& u, const Vec& a)> du;
  std::function<Vec(const Vec& q, const Vec& u, const Vec& a)> da;
  std::function<Mat(const Vec& q, const Vec& u, const Vec& a)> hess_aa;
  std::function<Mat(const Vec& q, const Vec& u, const Vec& a)> hess_au;
  std::function<Mat(const Vec& q, const Vec& u, const Vec& a)> hess_aq;
  double fd_step = 1e-5;
};

struct DynamicCostData {
  double value;
  Vec dq, du, da;
  Mat hess_aa, hess_au, hess_aq;
};

DynamicCostData cost_data_at(const CostDynamic& cost, const Vec& q,
                             const Vec& u, const Vec& a);

/** Forced mechanical system: unconstrained Lagrangian L(q, u) over the full
 *  quasi-velocity vector.  Constraints are applied after partials, so L must
 *  be meaningful at nonzero constrained slots. */
struct MechanicalSystem {
  QuasiFrame frame;

  std::function<double(const Vec& q, const Vec& u)> lagrangian;
  std::function<Vec(const Vec& q, const Vec& u)> dq;        // n
  std::function<Vec(const Vec& q, const Vec& u)> du;        // n
  std::function<Mat(const Vec& q, const Vec& u)> d2_uu;     // nxn
  std::function<Mat(const Vec& q, const Vec& u)> d2_uq;     // nxn
  double fd_step = 1e-5;
};

struct LagrangianData {
  double value;
  Vec dq, du;
  Mat d2_uu, d2_uq;
};

LagrangianData lagrangian_data_at(const MechanicalSystem& sys, const Vec& q,
                                  const Vec& u);

/** Covariant force conversion Q_i = Phi^j_i F_j. */
Vec quasi_force(const QuasiFrame& frame, const Vec& q, const Vec& coordinate_force);

/** Two-point boundary data.  u0/u1 hold free slots and are required for
 *  dynamic problems only. */
struct BoundaryConditions {
  double t0 = 0.0, t1 = 1.0;
  Vec q0, q1;
  std::optional<Vec> u0, u1;
};

struct KinematicOCP {
  QuasiFrame frame;
  CostKinematic cost;
  BoundaryConditions bc;
};

struct DynamicOCP {
  QuasiFrame frame;
  CostDynamic cost;
  BoundaryConditions bc;
};

/** Field-level validation findings; empty means well-formed. */
struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
  std::string joined() const;
};

ValidationReport validate(const KinematicOCP& ocp);
ValidationReport validate(const DynamicOCP& ocp);

/** Throws InvalidProblem listing every issue when validation fails. */
void validate_or_throw(const KinematicOCP& ocp);
void validate_or_throw(const DynamicOCP& ocp);

}  // namespace hamel
