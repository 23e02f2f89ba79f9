#include "hamel/problem.hpp"

#include <fmt/format.h>

namespace hamel {

namespace {

double scaled_step(double base, double coord) {
  return base * std::max(1.0, std::abs(coord));
}

/** Central-difference gradient of f over the coordinates of x. */
Vec fd_grad(const std::function<double(const Vec&)>& f, const Vec& x, double base) {
  Vec g(x.size());
  Vec xp = x, xm = x;
  for (int k = 0; k < x.size(); ++k) {
    const double h = scaled_step(base, x(k));
    xp(k) = x(k) + h;
    xm(k) = x(k) - h;
    g(k) = (f(xp) - f(xm)) / (2.0 * h);
    xp(k) = x(k);
    xm(k) = x(k);
  }
  return g;
}

/** Central-difference Jacobian of a vector map g over x (rows follow g). */
Mat fd_jac_of(const std::function<Vec(const Vec&)>& g, const Vec& x, int rows,
              double base) {
  Mat out(rows, x.size());
  Vec xp = x, xm = x;
  for (int k = 0; k < x.size(); ++k) {
    const double h = scaled_step(base, x(k));
    xp(k) = x(k) + h;
    xm(k) = x(k) - h;
    out.col(k) = (g(xp) - g(xm)) / (2.0 * h);
    xp(k) = x(k);
    xm(k) = x(k);
  }
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidProblem(what);
}

}  // namespace

KinematicCostData cost_data_at(const CostKinematic& cost, const Vec& q, const Vec& u) {
  require(static_cast<bool>(cost.value), "kinematic cost requires a value callback");
  KinematicCostData d;
  d.value = cost.value(q, u);

  auto grad_u = [&](const Vec& qq, const Vec& uu) {
    return cost.du ? cost.du(qq, uu)
                   : fd_grad([&](const Vec& v) { return cost.value(qq, v); }, uu,
                             cost.fd_step);
  };
  d.du = grad_u(q, u);
  d.dq = cost.dq ? cost.dq(q, u)
                 : fd_grad([&](const Vec& qq) { return cost.value(qq, u); }, q,
                           cost.fd_step);
  const int f = static_cast<int>(u.size());
  d.hess_uu = cost.hess_uu
                  ? cost.hess_uu(q, u)
                  : fd_jac_of([&](const Vec& v) { return grad_u(q, v); }, u, f,
                              cost.fd_step);
  d.hess_uq = cost.hess_uq
                  ? cost.hess_uq(q, u)
                  : fd_jac_of([&](const Vec& qq) { return grad_u(qq, u); }, q, f,
                              cost.fd_step);
  // Differencing may leave the Hessian asymmetric at roundoff level.
  d.hess_uu = 0.5 * (d.hess_uu + d.hess_uu.transpose()).eval();
  return d;
}

DynamicCostData cost_data_at(const CostDynamic& cost, const Vec& q, const Vec& u,
                             const Vec& a) {
  require(static_cast<bool>(cost.value), "dynamic cost requires a value callback");
  DynamicCostData d;
  d.value = cost.value(q, u, a);

  auto grad_a = [&](const Vec& qq, const Vec& uu, const Vec& aa) {
    return cost.da ? cost.da(qq, uu, aa)
                   : fd_grad([&](const Vec& v) { return cost.value(qq, uu, v); }, aa,
                             cost.fd_step);
  };
  d.da = grad_a(q, u, a);
  d.du = cost.du ? cost.du(q, u, a)
                 : fd_grad([&](const Vec& v) { return cost.value(q, v, a); }, u,
                           cost.fd_step);
  d.dq = cost.dq ? cost.dq(q, u, a)
                 : fd_grad([&](const Vec& v) { return cost.value(v, u, a); }, q,
                           cost.fd_step);
  const int f = static_cast<int>(a.size());
  d.hess_aa = cost.hess_aa
                  ? cost.hess_aa(q, u, a)
                  : fd_jac_of([&](const Vec& v) { return grad_a(q, u, v); }, a, f,
                              cost.fd_step);
  d.hess_au = cost.hess_au
                  ? cost.hess_au(q, u, a)
                  : fd_jac_of([&](const Vec& v) { return grad_a(q, v, a); }, u, f,
                              cost.fd_step);
  d.hess_aq = cost.hess_aq
                  ? cost.hess_aq(q, u, a)
                  : fd_jac_of([&](const Vec& v) { return grad_a(v, u, a); }, q, f,
                              cost.fd_step);
  d.hess_aa = 0.5 * (d.hess_aa + d.hess_aa.transpose()).eval();
  return d;
}

LagrangianData lagrangian_data_at(const MechanicalSystem& sys, const Vec& q,
                                  const Vec& u) {
  require(static_cast<bool>(sys.lagrangian), "mechanical system requires a Lagrangian");
  LagrangianData d;
  d.value = sys.lagrangian(q, u);
  auto grad_u = [&](const Vec& qq, const Vec& uu) {
    return sys.du ? sys.du(qq, uu)
                  : fd_grad([&](const Vec& v) { return sys.lagrangian(qq, v); }, uu,
                            sys.fd_step);
  };
  d.du = grad_u(q, u);
  d.dq = sys.dq ? sys.dq(q, u)
                : fd_grad([&](const Vec& v) { return sys.lagrangian(v, u); }, q,
                          sys.fd_step);
  const int n = static_cast<int>(u.size());
  d.d2_uu = sys.d2_uu ? sys.d2_uu(q, u)
                      : fd_jac_of([&](const Vec& v) { return grad_u(q, v); }, u, n,
                                  sys.fd_step);
  d.d2_uq = sys.d2_uq ? sys.d2_uq(q, u)
                      : fd_jac_of([&](const Vec& v) { return grad_u(v, u); }, q, n,
                                  sys.fd_step);
  d.d2_uu = 0.5 * (d.d2_uu + d.d2_uu.transpose()).eval();
  return d;
}

Vec quasi_force(const QuasiFrame& frame, const Vec& q, const Vec& coordinate_force) {
  if (coordinate_force.size() != frame.dof())
    throw InvalidProblem(fmt::format("quasi_force: force length {}, expected {}",
                                     coordinate_force.size(), frame.dof()));
  return frame.phi_at(q).transpose() * coordinate_force;
}

std::string ValidationReport::joined() const {
  std::string out;
  for (size_t i = 0; i < issues.size(); ++i) {
    if (i > 0) out += "; ";
    out += issues[i];
  }
  return out;
}

namespace {

void check_bc_common(const QuasiFrame& frame, const BoundaryConditions& bc,
                     ValidationReport& rep) {
  const int n = frame.dof();
  if (bc.q0.size() != n)
    rep.issues.push_back(fmt::format("q0 length {}, expected {}", bc.q0.size(), n));
  if (bc.q1.size() != n)
    rep.issues.push_back(fmt::format("q1 length {}, expected {}", bc.q1.size(), n));
  if (!(bc.t1 > bc.t0))
    rep.issues.push_back(fmt::format("time window [{}, {}] is empty", bc.t0, bc.t1));
  for (const char* which : {"q0", "q1"}) {
    const Vec& q = (which[1] == '0') ? bc.q0 : bc.q1;
    if (q.size() != n) continue;
    try {
      frame.phi_at(q);
    } catch (const SingularFrame& e) {
      rep.issues.push_back(fmt::format("frame singular at {}: {}", which, e.what()));
    }
  }
}

bool spd(const Mat& h) {
  if (!h.allFinite() || h.rows() != h.cols()) return false;
  Eigen::LLT<Mat> llt(h);
  return llt.info() == Eigen::Success;
}

}  // namespace

ValidationReport validate(const KinematicOCP& ocp) {
  ValidationReport rep;
  if (!ocp.cost.value) rep.issues.push_back("cost value callback missing");
  check_bc_common(ocp.frame, ocp.bc, rep);
  if (rep.ok()) {
    Vec u0 = Vec::Zero(ocp.frame.free_count());
    auto d = cost_data_at(ocp.cost, ocp.bc.q0, u0);
    if (!spd(d.hess_uu))
      rep.issues.push_back("hess_uu not symmetric positive definite at (q0, 0)");
  }
  return rep;
}

ValidationReport validate(const DynamicOCP& ocp) {
  ValidationReport rep;
  if (!ocp.cost.value) rep.issues.push_back("cost value callback missing");
  check_bc_common(ocp.frame, ocp.bc, rep);
  const int f = ocp.frame.free_count();
  if (!ocp.bc.u0.has_value())
    rep.issues.push_back("u0_free required");
  else if (ocp.bc.u0->size() != f)
    rep.issues.push_back(fmt::format("u0 length {}, expected {}", ocp.bc.u0->size(), f));
  if (!ocp.bc.u1.has_value())
    rep.issues.push_back("u1_free required");
  else if (ocp.bc.u1->size() != f)
    rep.issues.push_back(fmt::format("u1 length {}, expected {}", ocp.bc.u1->size(), f));
  if (rep.ok()) {
    auto d = cost_data_at(ocp.cost, ocp.bc.q0, *ocp.bc.u0, Vec::Zero(f));
    if (!spd(d.hess_aa))
      rep.issues.push_back("hess_aa not symmetric positive definite at (q0, u0, 0)");
  }
  return rep;
}

void validate_or_throw(const KinematicOCP& ocp) {
  auto rep = validate(ocp);
  if (!rep.ok()) throw InvalidProblem(rep.joined());
}

void validate_or_throw(const DynamicOCP& ocp) {
  auto rep = validate(ocp);
  if (!rep.ok()) throw InvalidProblem(rep.joined());
}

}  // namespace hamel
