#include "hamel/assembly.hpp"

#include <fmt/format.h>

namespace hamel {

const char* layout_name(Layout layout) {
  switch (layout) {
    case Layout::mechanics: return "mechanics";
    case Layout::kinematic_oc: return "kinematic";
    case Layout::dynamic_oc: return "dynamic";
  }
  return "?";
}

Layout layout_from_name(const std::string& name) {
  if (name == "mechanics") return Layout::mechanics;
  if (name == "kinematic") return Layout::kinematic_oc;
  if (name == "dynamic") return Layout::dynamic_oc;
  throw UnsupportedLayout(
      fmt::format("unknown layout '{}' (mechanics | kinematic | dynamic)", name));
}

StateLayout::StateLayout(Layout kind, int n, int m)
    : kind(kind), n(n), m(m), f(n - m) {}

int StateLayout::size() const {
  switch (kind) {
    case Layout::mechanics: return n + f;
    case Layout::kinematic_oc: return n + f + m;
    case Layout::dynamic_oc: return n + 3 * f + m;
  }
  return 0;
}

int StateLayout::a_offset() const {
  if (kind != Layout::dynamic_oc)
    throw UnsupportedLayout(fmt::format("{} layout has no acceleration block",
                                        layout_name(kind)));
  return n + f;
}

int StateLayout::j_offset() const { return a_offset() + f; }

int StateLayout::mu_offset() const {
  switch (kind) {
    case Layout::kinematic_oc: return n + f;
    case Layout::dynamic_oc: return n + 3 * f;
    case Layout::mechanics:
      throw UnsupportedLayout("mechanics layout has no multiplier block");
  }
  return 0;
}

namespace {

void check_state(const StateLayout& lay, const Vec& x, const char* op) {
  if (x.size() != lay.size())
    throw InvalidProblem(fmt::format("{}: state length {}, expected {} for {} layout",
                                     op, x.size(), lay.size(), layout_name(lay.kind)));
}

/** Sum_S gamma(j, S, i) u^S over free slots S (constrained u vanish). */
double gamma_contraction(const Tensor3& gamma, const std::vector<int>& free,
                         const Vec& u_full, int j, int i) {
  double acc = 0.0;
  for (int s : free) acc += gamma(j, s, i) * u_full(s);
  return acc;
}

/** Solve the symmetric block H x = b; SingularMass names the block. */
Vec solve_sym(const Mat& h, const Vec& b, const char* what) {
  Eigen::LDLT<Mat> ldlt(h);
  if (ldlt.info() != Eigen::Success)
    throw SingularMass(fmt::format("{} is not factorizable", what));
  Vec x = ldlt.solve(b);
  if (!x.allFinite() || (h * x - b).cwiseAbs().maxCoeff() >
                            1e-8 * std::max(1.0, b.cwiseAbs().maxCoeff()))
    throw SingularMass(fmt::format("{} solve failed (singular to working precision)", what));
  return x;
}

}  // namespace

Vec mechanics_rhs(const MechanicalSystem& sys,
                  const std::function<Vec(double)>& forces, double t,
                  const Vec& state) {
  const QuasiFrame& frame = sys.frame;
  const StateLayout lay(Layout::mechanics, frame.dof(), frame.constraint_count());
  check_state(lay, state, "mechanics_rhs");
  const auto& free = frame.free_slots();
  const int f = lay.f;

  const Vec q = lay.q(state);
  const Vec u_full = frame.full_from_free(lay.u(state));
  const FrameData fd = frame.evaluate(q);
  const Vec qdot = fd.phi * u_full;

  const LagrangianData ld = lagrangian_data_at(sys, q, u_full);
  const Vec dtheta = fd.phi.transpose() * ld.dq;  // dL/dtheta_i = dL/dq_j Phi^j_i

  Vec quasi_forces = forces ? forces(t) : Vec::Zero(f);
  if (quasi_forces.size() != f)
    throw InvalidProblem(fmt::format("forces(t) length {}, expected {}",
                                     quasi_forces.size(), f));

  // Free-free mass block and the generalized bias, Eq. u^sigma = 0 applied
  // after every partial.
  Mat mass(f, f);
  Vec b(f);
  for (int r = 0; r < f; ++r) {
    const int slot = free[r];
    for (int c = 0; c < f; ++c) mass(r, c) = ld.d2_uu(slot, free[c]);
    double gam = 0.0;
    for (int j = 0; j < lay.n; ++j)
      gam += ld.du(j) * gamma_contraction(fd.gamma, free, u_full, j, slot);
    b(r) = quasi_forces(r) + dtheta(slot) + gam - ld.d2_uq.row(slot).dot(qdot);
  }
  const Vec udot = solve_sym(mass, b, "quasi-velocity mass matrix");

  Vec out(lay.size());
  out.segment(0, lay.n) = qdot;
  out.segment(lay.u_offset(), f) = udot;
  return out;
}

Vec recover_controls(const MechanicalSystem& sys, const Vec& q, const Vec& u,
                     const Vec& udot) {
  const QuasiFrame& frame = sys.frame;
  const auto& free = frame.free_slots();
  const int f = frame.free_count();
  if (u.size() != f || udot.size() != f)
    throw InvalidProblem(fmt::format(
        "recover_controls: rate vectors length {}/{}, expected {}", u.size(),
        udot.size(), f));

  const Vec u_full = frame.full_from_free(u);
  const FrameData fd = frame.evaluate(q);
  const Vec qdot = fd.phi * u_full;
  const LagrangianData ld = lagrangian_data_at(sys, q, u_full);
  const Vec dtheta = fd.phi.transpose() * ld.dq;

  Vec controls(f);
  for (int r = 0; r < f; ++r) {
    const int slot = free[r];
    double ddt = ld.d2_uq.row(slot).dot(qdot);  // d/dt dL/du^I, chain rule
    for (int c = 0; c < f; ++c) ddt += ld.d2_uu(slot, free[c]) * udot(c);
    double gam = 0.0;
    for (int j = 0; j < frame.dof(); ++j)
      gam += ld.du(j) * gamma_contraction(fd.gamma, free, u_full, j, slot);
    controls(r) = ddt - dtheta(slot) - gam;
  }
  return controls;
}

Vec kinematic_rhs(const KinematicOCP& ocp, const Vec& state) {
  const QuasiFrame& frame = ocp.frame;
  const StateLayout lay(Layout::kinematic_oc, frame.dof(), frame.constraint_count());
  check_state(lay, state, "kinematic_rhs");
  const auto& free = frame.free_slots();
  const auto& cons = frame.constrained_slots();
  const int f = lay.f, m = lay.m;

  const Vec q = lay.q(state);
  const Vec uf = lay.u(state);
  const Vec mu = lay.mu(state);
  const Vec u_full = frame.full_from_free(uf);
  const FrameData fd = frame.evaluate(q);
  const Vec qdot = fd.phi * u_full;

  const KinematicCostData cd = cost_data_at(ocp.cost, q, uf);
  const Vec dtheta = fd.phi.transpose() * cd.dq;

  // r(i) = dC/dtheta_i + dC/du_J gamma^J_(S,i) u^S + mu_tau gamma^tau_(S,i) u^S
  auto stationarity = [&](int slot) {
    double v = dtheta(slot);
    for (int jf = 0; jf < f; ++jf)
      v += cd.du(jf) * gamma_contraction(fd.gamma, free, u_full, free[jf], slot);
    for (int t = 0; t < m; ++t)
      v += mu(t) * gamma_contraction(fd.gamma, free, u_full, cons[t], slot);
    return v;
  };

  Vec b(f);
  for (int r = 0; r < f; ++r)
    b(r) = stationarity(free[r]) - cd.hess_uq.row(r).dot(qdot);
  const Vec udot = solve_sym(cd.hess_uu, b, "cost Hessian hess_uu");

  Vec mudot(m);
  for (int s = 0; s < m; ++s) mudot(s) = stationarity(cons[s]);

  Vec out(lay.size());
  out.segment(0, lay.n) = qdot;
  out.segment(lay.u_offset(), f) = udot;
  out.segment(lay.mu_offset(), m) = mudot;
  return out;
}

Vec kappa(const DynamicOCP& ocp, const Vec& q, const Vec& u, const Vec& a,
          const Vec& j) {
  const QuasiFrame& frame = ocp.frame;
  const int f = frame.free_count();
  if (u.size() != f || a.size() != f || j.size() != f)
    throw InvalidProblem(fmt::format("kappa: block lengths {}/{}/{}, expected {}",
                                     u.size(), a.size(), j.size(), f));
  const Vec u_full = frame.full_from_free(u);
  const Vec qdot = frame.phi_at(q) * u_full;
  const DynamicCostData cd = cost_data_at(ocp.cost, q, u, a);
  return cd.du - (cd.hess_aa * j + cd.hess_au * a + cd.hess_aq * qdot);
}

Vec dynamic_rhs(const DynamicOCP& ocp, const Vec& state) {
  const QuasiFrame& frame = ocp.frame;
  const StateLayout lay(Layout::dynamic_oc, frame.dof(), frame.constraint_count());
  check_state(lay, state, "dynamic_rhs");
  const auto& free = frame.free_slots();
  const auto& cons = frame.constrained_slots();
  const int f = lay.f, m = lay.m, n = lay.n;

  const Vec q = lay.q(state);
  const Vec uf = lay.u(state);
  const Vec af = lay.a(state);
  const Vec jf = lay.j(state);
  const Vec mu = lay.mu(state);
  const Vec u_full = frame.full_from_free(uf);
  const FrameData fd = frame.evaluate(q);
  const Vec qdot = fd.phi * u_full;

  const DynamicCostData cd = cost_data_at(ocp.cost, q, uf, af);
  const Vec dtheta = fd.phi.transpose() * cd.dq;
  const Vec kap = cd.du - (cd.hess_aa * jf + cd.hess_au * af + cd.hess_aq * qdot);

  auto stationarity = [&](int slot) {
    double v = dtheta(slot);
    for (int jfi = 0; jfi < f; ++jfi)
      v += kap(jfi) * gamma_contraction(fd.gamma, free, u_full, free[jfi], slot);
    for (int t = 0; t < m; ++t)
      v += mu(t) * gamma_contraction(fd.gamma, free, u_full, cons[t], slot);
    return v;
  };

  // Required kappa-dot from the reduced adjoint equation, then the chain
  // rule through (q, u, a) by central differences on kappa itself (the
  // j-slope is exactly -hess_aa, so no third-order cost data is needed).
  Vec required(f);
  for (int r = 0; r < f; ++r) required(r) = stationarity(free[r]);

  auto kappa_at = [&](const Vec& qq, const Vec& uu, const Vec& aa) {
    const Vec full = frame.full_from_free(uu);
    const Vec qd = frame.phi_at(qq) * full;
    const DynamicCostData c = cost_data_at(ocp.cost, qq, uu, aa);
    return Vec(c.du - (c.hess_aa * jf + c.hess_au * aa + c.hess_aq * qd));
  };
  const double base = ocp.cost.fd_step;
  Vec chain = Vec::Zero(f);
  {
    Vec xp, xm;
    xp = q; xm = q;
    for (int k = 0; k < n; ++k) {
      const double h = base * std::max(1.0, std::abs(q(k)));
      xp(k) = q(k) + h;
      xm(k) = q(k) - h;
      chain += ((kappa_at(xp, uf, af) - kappa_at(xm, uf, af)) / (2.0 * h)) * qdot(k);
      xp(k) = q(k);
      xm(k) = q(k);
    }
    xp = uf; xm = uf;
    for (int k = 0; k < f; ++k) {
      const double h = base * std::max(1.0, std::abs(uf(k)));
      xp(k) = uf(k) + h;
      xm(k) = uf(k) - h;
      chain += ((kappa_at(q, xp, af) - kappa_at(q, xm, af)) / (2.0 * h)) * af(k);
      xp(k) = uf(k);
      xm(k) = uf(k);
    }
    xp = af; xm = af;
    for (int k = 0; k < f; ++k) {
      const double h = base * std::max(1.0, std::abs(af(k)));
      xp(k) = af(k) + h;
      xm(k) = af(k) - h;
      chain += ((kappa_at(q, uf, xp) - kappa_at(q, uf, xm)) / (2.0 * h)) * jf(k);
      xp(k) = af(k);
      xm(k) = af(k);
    }
  }
  const Vec jdot = solve_sym(cd.hess_aa, chain - required, "cost Hessian hess_aa");

  Vec mudot(m);
  for (int s = 0; s < m; ++s) mudot(s) = stationarity(cons[s]);

  Vec out(lay.size());
  out.segment(0, n) = qdot;
  out.segment(lay.u_offset(), f) = af;
  out.segment(lay.a_offset(), f) = jf;
  out.segment(lay.j_offset(), f) = jdot;
  out.segment(lay.mu_offset(), m) = mudot;
  return out;
}

}  // namespace hamel
