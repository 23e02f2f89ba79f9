#include "hamel/models.hpp"

#include <fmt/format.h>

#include <cmath>

namespace hamel {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

void reject_unknown_params(const ModelParams& params,
                           std::initializer_list<const char*> allowed,
                           const std::string& model) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok)
      throw InvalidProblem(fmt::format("model {} has no parameter '{}'", model, key));
    (void)value;
  }
}

UnsupportedLayout no_layout(const std::string& model, Layout layout) {
  return UnsupportedLayout(
      fmt::format("model {} does not provide the {} layout", model, layout_name(layout)));
}

// ---------------------------------------------------------------------------
// Heisenberg system: q = (x, y, z), constraint zdot = y xdot - x ydot,
// velocity controls u2, u3.
// ---------------------------------------------------------------------------

BuiltinModel make_heisenberg() {
  BuiltinModel model;
  model.name = "heisenberg";
  model.title = "Heisenberg system, velocity-steered";

  QuasiFrame::Options opts;
  opts.psi_jacobian = [](const Vec& q) {
    Tensor3 d(3);
    (void)q;
    d(0, 0, 1) = 1.0;   // dPsi^1_1 / dy
    d(0, 1, 0) = -1.0;  // dPsi^1_2 / dx
    return d;
  };
  model.frame = QuasiFrame(
      3, 1,
      [](const Vec& q) {
        Mat psi = Mat::Zero(3, 3);
        psi(0, 0) = q(1);
        psi(0, 1) = -q(0);
        psi(0, 2) = -1.0;
        psi(1, 0) = 1.0;
        psi(2, 1) = 1.0;
        return psi;
      },
      opts);

  CostKinematic cost;
  cost.value = [](const Vec&, const Vec& u) { return 0.5 * u.squaredNorm(); };
  cost.dq = [](const Vec& q, const Vec&) { return Vec(Vec::Zero(q.size())); };
  cost.du = [](const Vec&, const Vec& u) { return u; };
  cost.hess_uu = [](const Vec&, const Vec& u) {
    return Mat(Mat::Identity(u.size(), u.size()));
  };
  cost.hess_uq = [](const Vec& q, const Vec& u) {
    return Mat(Mat::Zero(u.size(), q.size()));
  };

  Scenario steer;
  steer.name = "steer_z";
  steer.summary = "closed (x, y) loop transferring z by one unit";
  steer.layout = Layout::kinematic_oc;
  steer.bc.t0 = 0.0;
  steer.bc.t1 = 1.0;
  steer.bc.q0 = vec({0.0, 0.0, 0.0});
  steer.bc.q1 = vec({0.0, 0.0, 1.0});
  steer.guess = vec({2.5, 0.0, -3.0});  // near the one-loop branch
  model.scenarios.push_back(steer);

  model.kinematic = KinematicOCP{model.frame, cost, steer.bc};

  model.chart_box.lo = vec({-1.5, -1.5, -1.5});
  model.chart_box.hi = vec({1.5, 1.5, 1.5});

  model.reference_rhs = [](Layout layout, const Vec& x, const Vec&) -> Vec {
    if (layout != Layout::kinematic_oc)
      throw no_layout("heisenberg", layout);
    // State (x, y, z, u2, u3, mu).
    const double u2 = x(3), u3 = x(4), mu = x(5);
    Vec dx(6);
    dx(0) = u2;
    dx(1) = u3;
    dx(2) = x(1) * u2 - x(0) * u3;
    dx(3) = -2.0 * mu * u3;
    dx(4) = 2.0 * mu * u2;
    dx(5) = 0.0;
    return dx;
  };
  return model;
}

// ---------------------------------------------------------------------------
// Vertical rolling disc: q = (x, y, theta, phi), rolling constraints
// xdot = cos(phi) thetadot, ydot = sin(phi) thetadot.
// ---------------------------------------------------------------------------

QuasiFrame vertical_disc_frame() {
  QuasiFrame::Options opts;
  opts.psi_jacobian = [](const Vec& q) {
    Tensor3 d(4);
    const double c = std::cos(q(3)), s = std::sin(q(3));
    d(0, 2, 3) = s;   // d(-cos phi)/d phi
    d(1, 2, 3) = -c;  // d(-sin phi)/d phi
    return d;
  };
  return QuasiFrame(
      4, 2,
      [](const Vec& q) {
        const double c = std::cos(q(3)), s = std::sin(q(3));
        Mat psi = Mat::Identity(4, 4);
        psi(0, 2) = -c;
        psi(1, 2) = -s;
        return psi;
      },
      opts);
}

Vec vertical_disc_qdot(const Vec& q, double u3, double u4) {
  const double c = std::cos(q(3)), s = std::sin(q(3));
  return vec({c * u3, s * u3, u3, u4});
}

BuiltinModel make_vertical_disc_kin() {
  BuiltinModel model;
  model.name = "vertical_disc_kin";
  model.title = "vertical rolling disc, velocity-steered";
  model.frame = vertical_disc_frame();

  CostKinematic cost;
  cost.value = [](const Vec&, const Vec& u) { return 0.5 * u.squaredNorm(); };
  cost.dq = [](const Vec& q, const Vec&) { return Vec(Vec::Zero(q.size())); };
  cost.du = [](const Vec&, const Vec& u) { return u; };
  cost.hess_uu = [](const Vec&, const Vec& u) {
    return Mat(Mat::Identity(u.size(), u.size()));
  };
  cost.hess_uq = [](const Vec& q, const Vec& u) {
    return Mat(Mat::Zero(u.size(), q.size()));
  };

  Scenario roll;
  roll.name = "roll";
  roll.summary = "straight roll, two units of contact-path and heading angle";
  roll.bc.q0 = vec({0.0, 0.0, 0.0, 0.0});
  roll.bc.q1 = vec({2.0, 0.0, 2.0, 0.0});
  model.scenarios.push_back(roll);

  Scenario park;
  park.name = "park";
  park.summary = "identical endpoints; zero-control solution";
  park.bc.q0 = vec({0.0, 0.0, 0.0, 0.0});
  park.bc.q1 = park.bc.q0;
  model.scenarios.push_back(park);

  model.kinematic = KinematicOCP{model.frame, cost, roll.bc};

  model.chart_box.lo = vec({-2.5, -2.5, -kPi, -kPi});
  model.chart_box.hi = vec({2.5, 2.5, kPi, kPi});

  model.reference_rhs = [](Layout layout, const Vec& x, const Vec&) -> Vec {
    if (layout != Layout::kinematic_oc)
      throw no_layout("vertical_disc_kin", layout);
    // State (x, y, theta, phi, u3, u4, mu1, mu2).
    const double phi = x(3), u3 = x(4), u4 = x(5), mu1 = x(6), mu2 = x(7);
    const double c = std::cos(phi), s = std::sin(phi);
    Vec dx(8);
    dx.segment(0, 4) = vertical_disc_qdot(x.segment(0, 4), u3, u4);
    dx(4) = (mu2 * c - mu1 * s) * u4;
    dx(5) = (mu1 * s - mu2 * c) * u3;
    dx(6) = 0.0;
    dx(7) = 0.0;
    return dx;
  };
  return model;
}

/** Unconstrained disc Lagrangian in quasi-velocities: unit mass and rolling
 *  radius, axial inertia 1/2, steering inertia 1/4, so the constrained
 *  kinetic energy is (3/4) u3^2 + (1/8) u4^2. */
MechanicalSystem vertical_disc_mechanical(const QuasiFrame& frame) {
  MechanicalSystem sys;
  sys.frame = frame;
  sys.lagrangian = [](const Vec& q, const Vec& u) {
    const double c = std::cos(q(3)), s = std::sin(q(3));
    const double vx = u(0) + c * u(2), vy = u(1) + s * u(2);
    return 0.5 * (vx * vx + vy * vy) + 0.25 * u(2) * u(2) + 0.125 * u(3) * u(3);
  };
  sys.dq = [](const Vec& q, const Vec& u) {
    const double c = std::cos(q(3)), s = std::sin(q(3));
    const double vx = u(0) + c * u(2), vy = u(1) + s * u(2);
    Vec g = Vec::Zero(4);
    g(3) = vx * (-s * u(2)) + vy * (c * u(2));
    return g;
  };
  sys.du = [](const Vec& q, const Vec& u) {
    const double c = std::cos(q(3)), s = std::sin(q(3));
    const double vx = u(0) + c * u(2), vy = u(1) + s * u(2);
    return vec({vx, vy, c * vx + s * vy + 0.5 * u(2), 0.25 * u(3)});
  };
  sys.d2_uu = [](const Vec& q, const Vec&) {
    const double c = std::cos(q(3)), s = std::sin(q(3));
    Mat h(4, 4);
    h << 1, 0, c, 0, 0, 1, s, 0, c, s, 1.5, 0, 0, 0, 0, 0.25;
    return h;
  };
  sys.d2_uq = [](const Vec& q, const Vec& u) {
    const double c = std::cos(q(3)), s = std::sin(q(3));
    Mat h = Mat::Zero(4, 4);
    h(0, 3) = -s * u(2);
    h(1, 3) = c * u(2);
    h(2, 3) = -s * u(0) + c * u(1);
    return h;
  };
  return sys;
}

BuiltinModel make_vertical_disc_dyn() {
  BuiltinModel model;
  model.name = "vertical_disc_dyn";
  model.title = "vertical rolling disc, torque-driven";
  model.frame = vertical_disc_frame();

  CostDynamic cost;
  cost.value = [](const Vec&, const Vec&, const Vec& a) {
    return (9.0 / 8.0) * a(0) * a(0) + (1.0 / 32.0) * a(1) * a(1);
  };
  cost.dq = [](const Vec& q, const Vec&, const Vec&) { return Vec(Vec::Zero(q.size())); };
  cost.du = [](const Vec&, const Vec& u, const Vec&) { return Vec(Vec::Zero(u.size())); };
  cost.da = [](const Vec&, const Vec&, const Vec& a) {
    return vec({(9.0 / 4.0) * a(0), (1.0 / 16.0) * a(1)});
  };
  cost.hess_aa = [](const Vec&, const Vec&, const Vec&) {
    Mat h = Mat::Zero(2, 2);
    h(0, 0) = 9.0 / 4.0;
    h(1, 1) = 1.0 / 16.0;
    return h;
  };
  cost.hess_au = [](const Vec&, const Vec&, const Vec&) { return Mat(Mat::Zero(2, 2)); };
  cost.hess_aq = [](const Vec&, const Vec&, const Vec&) { return Mat(Mat::Zero(2, 4)); };

  Scenario roll;
  roll.name = "roll_theta";
  roll.summary = "rest-to-rest roll through one unit of theta and x";
  roll.layout = Layout::dynamic_oc;
  roll.bc.q0 = vec({0.0, 0.0, 0.0, 0.0});
  roll.bc.q1 = vec({1.0, 0.0, 1.0, 0.0});
  roll.bc.u0 = vec({0.0, 0.0});
  roll.bc.u1 = vec({0.0, 0.0});
  model.scenarios.push_back(roll);

  model.dynamic = DynamicOCP{model.frame, cost, roll.bc};
  model.mechanical = vertical_disc_mechanical(model.frame);

  model.chart_box.lo = vec({-2.5, -2.5, -kPi, -kPi});
  model.chart_box.hi = vec({2.5, 2.5, kPi, kPi});

  model.reference_rhs = [](Layout layout, const Vec& x, const Vec& controls) -> Vec {
    if (layout == Layout::mechanics) {
      // State (x, y, theta, phi, u3, u4); controls (w3, w4).
      Vec dx(6);
      dx.segment(0, 4) = vertical_disc_qdot(x.segment(0, 4), x(4), x(5));
      dx(4) = (2.0 / 3.0) * controls(0);
      dx(5) = 4.0 * controls(1);
      return dx;
    }
    if (layout != Layout::dynamic_oc)
      throw no_layout("vertical_disc_dyn", layout);
    // State (x, y, theta, phi, u3, u4, a3, a4, j3, j4, mu1, mu2).
    const double phi = x(3), u3 = x(4), u4 = x(5);
    const double mu1 = x(10), mu2 = x(11);
    const double c = std::cos(phi), s = std::sin(phi);
    Vec dx(12);
    dx.segment(0, 4) = vertical_disc_qdot(x.segment(0, 4), u3, u4);
    dx(4) = x(6);
    dx(5) = x(7);
    dx(6) = x(8);
    dx(7) = x(9);
    dx(8) = (4.0 / 9.0) * (mu1 * s - mu2 * c) * u4;
    dx(9) = 16.0 * (-mu1 * s + mu2 * c) * u3;
    dx(10) = 0.0;
    dx(11) = 0.0;
    return dx;
  };
  return model;
}

// ---------------------------------------------------------------------------
// Falling disc: q = (phi, theta, psi, x, y), vertical-plane spin coupled to
// contact-point rolling; the two rolling constraints sit in slots 4 and 5.
// ---------------------------------------------------------------------------

BuiltinModel make_falling_disc(const ModelParams& params) {
  reject_unknown_params(params, {"r"}, "falling_disc_kin");
  const double r = params.count("r") ? params.at("r") : 1.0;
  if (!(r > 0.0))
    throw InvalidProblem(fmt::format("falling_disc_kin parameter r = {} must be positive", r));

  BuiltinModel model;
  model.name = "falling_disc_kin";
  model.title = "falling disc, velocity-steered";

  QuasiFrame::Options opts;
  opts.constrained_slots = {3, 4};
  opts.psi_jacobian = [r](const Vec& q) {
    Tensor3 d(5);
    const double cphi = std::cos(q(0)), sphi = std::sin(q(0));
    const double cth = std::cos(q(1)), sth = std::sin(q(1));
    d(0, 0, 1) = cth;        // d sin(theta)/d theta
    d(2, 0, 1) = -sth;       // d cos(theta)/d theta
    d(3, 2, 0) = -r * sphi;  // d (r cos phi)/d phi
    d(4, 2, 0) = r * cphi;   // d (r sin phi)/d phi
    return d;
  };
  model.frame = QuasiFrame(
      5, 2,
      [r](const Vec& q) {
        const double cphi = std::cos(q(0)), sphi = std::sin(q(0));
        const double cth = std::cos(q(1)), sth = std::sin(q(1));
        Mat psi = Mat::Zero(5, 5);
        psi(0, 0) = sth;
        psi(1, 1) = 1.0;
        psi(2, 0) = cth;
        psi(2, 2) = 1.0;
        psi(3, 2) = r * cphi;
        psi(3, 3) = 1.0;
        psi(4, 2) = r * sphi;
        psi(4, 4) = 1.0;
        return psi;
      },
      opts);

  CostKinematic cost;
  cost.value = [](const Vec&, const Vec& u) { return 0.5 * u.squaredNorm(); };
  cost.dq = [](const Vec& q, const Vec&) { return Vec(Vec::Zero(q.size())); };
  cost.du = [](const Vec&, const Vec& u) { return u; };
  cost.hess_uu = [](const Vec&, const Vec& u) {
    return Mat(Mat::Identity(u.size(), u.size()));
  };
  cost.hess_uq = [](const Vec& q, const Vec& u) {
    return Mat(Mat::Zero(u.size(), q.size()));
  };

  Scenario reorient;
  reorient.name = "reorient";
  reorient.summary = "lean change of 0.1 at fixed heading and contact point";
  reorient.bc.q0 = vec({0.0, 0.5 * kPi, 0.0, 0.0, 0.0});
  reorient.bc.q1 = vec({0.0, 0.5 * kPi + 0.1, 0.0, 0.0, 0.0});
  model.scenarios.push_back(reorient);

  model.kinematic = KinematicOCP{model.frame, cost, reorient.bc};

  model.chart_box.lo = vec({-kPi, 0.2, -kPi, -1.0, -1.0});
  model.chart_box.hi = vec({kPi, kPi - 0.2, kPi, 1.0, 1.0});

  model.reference_rhs = [r](Layout layout, const Vec& x, const Vec&) -> Vec {
    if (layout != Layout::kinematic_oc)
      throw no_layout("falling_disc_kin", layout);
    // State (phi, theta, psi, x, y, u1, u2, u3, mu4, mu5).
    const double phi = x(0), th = x(1);
    const double u1 = x(5), u2 = x(6), u3 = x(7), mu4 = x(8), mu5 = x(9);
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    const double cot = std::cos(th) / std::sin(th), csc = 1.0 / std::sin(th);
    Vec dx(10);
    dx(0) = csc * u1;
    dx(1) = u2;
    dx(2) = -cot * u1 + u3;
    dx(3) = r * cphi * cot * u1 - r * cphi * u3;
    dx(4) = r * sphi * cot * u1 - r * sphi * u3;
    dx(5) = u2 * u3 - u1 * u2 * cot - r * (mu4 * sphi - mu5 * cphi) * csc * u3;
    dx(6) = u1 * u1 * cot - u1 * u3;
    dx(7) = r * (mu4 * sphi - mu5 * cphi) * csc * u1;
    dx(8) = 0.0;
    dx(9) = 0.0;
    return dx;
  };
  return model;
}

// ---------------------------------------------------------------------------
// Free rigid body in type-I Euler angles q = (psi, theta, phi), body
// angular velocity quasi-frame, principal inertia (Ixx, Iyy, Izz).
// ---------------------------------------------------------------------------

QuasiFrame euler_body_frame() {
  QuasiFrame::Options opts;
  opts.psi_jacobian = [](const Vec& q) {
    Tensor3 d(3);
    const double cth = std::cos(q(1)), sth = std::sin(q(1));
    const double cphi = std::cos(q(2)), sphi = std::sin(q(2));
    d(0, 0, 1) = -cth;
    d(1, 0, 1) = -sth * sphi;
    d(1, 0, 2) = cth * cphi;
    d(1, 1, 2) = -sphi;
    d(2, 0, 1) = -sth * cphi;
    d(2, 0, 2) = -cth * sphi;
    d(2, 1, 2) = -cphi;
    return d;
  };
  return QuasiFrame(
      3, 0,
      [](const Vec& q) {
        const double cth = std::cos(q(1)), sth = std::sin(q(1));
        const double cphi = std::cos(q(2)), sphi = std::sin(q(2));
        Mat psi(3, 3);
        psi << -sth, 0, 1, cth * sphi, cphi, 0, cth * cphi, -sphi, 0;
        return psi;
      },
      opts);
}

/** Euler chart rows of qdot = Phi u, shared by every body model. */
Vec euler_qdot(const Vec& q, const Vec& u) {
  const double sec = 1.0 / std::cos(q(1)), tan = std::tan(q(1));
  const double cphi = std::cos(q(2)), sphi = std::sin(q(2));
  Vec dq(3);
  dq(0) = sec * (sphi * u(1) + cphi * u(2));
  dq(1) = cphi * u(1) - sphi * u(2);
  dq(2) = u(0) + tan * (sphi * u(1) + cphi * u(2));
  return dq;
}

struct Inertia {
  double i1, i2, i3;
  double eta1() const { return i3 - i2; }  // torque coupling u2 u3
  double eta2() const { return i1 - i3; }  // torque coupling u1 u3
  double eta3() const { return i2 - i1; }  // torque coupling u1 u2
};

/** Torques realizing (a, u): M_k = I_k a_k + eta_k w_k with the gyroscopic
 *  products w = (u2 u3, u1 u3, u1 u2). */
Eigen::Vector3d body_torque(const Inertia& in, const Vec& u, const Vec& a) {
  return {in.i1 * a(0) + in.eta1() * u(1) * u(2),
          in.i2 * a(1) + in.eta2() * u(0) * u(2),
          in.i3 * a(2) + in.eta3() * u(0) * u(1)};
}

CostDynamic body_effort_cost(const Inertia& in) {
  CostDynamic cost;
  cost.value = [in](const Vec&, const Vec& u, const Vec& a) {
    return 0.5 * body_torque(in, u, a).squaredNorm();
  };
  cost.dq = [](const Vec& q, const Vec&, const Vec&) { return Vec(Vec::Zero(q.size())); };
  cost.du = [in](const Vec&, const Vec& u, const Vec& a) {
    const auto m = body_torque(in, u, a);
    return vec({m(1) * in.eta2() * u(2) + m(2) * in.eta3() * u(1),
                m(0) * in.eta1() * u(2) + m(2) * in.eta3() * u(0),
                m(0) * in.eta1() * u(1) + m(1) * in.eta2() * u(0)});
  };
  cost.da = [in](const Vec&, const Vec& u, const Vec& a) {
    const auto m = body_torque(in, u, a);
    return vec({in.i1 * m(0), in.i2 * m(1), in.i3 * m(2)});
  };
  cost.hess_aa = [in](const Vec&, const Vec&, const Vec&) {
    Mat h = Mat::Zero(3, 3);
    h(0, 0) = in.i1 * in.i1;
    h(1, 1) = in.i2 * in.i2;
    h(2, 2) = in.i3 * in.i3;
    return h;
  };
  cost.hess_au = [in](const Vec&, const Vec& u, const Vec&) {
    Mat h = Mat::Zero(3, 3);
    h(0, 1) = in.i1 * in.eta1() * u(2);
    h(0, 2) = in.i1 * in.eta1() * u(1);
    h(1, 0) = in.i2 * in.eta2() * u(2);
    h(1, 2) = in.i2 * in.eta2() * u(0);
    h(2, 0) = in.i3 * in.eta3() * u(1);
    h(2, 1) = in.i3 * in.eta3() * u(0);
    return h;
  };
  cost.hess_aq = [](const Vec&, const Vec&, const Vec&) { return Mat(Mat::Zero(3, 3)); };
  return cost;
}

MechanicalSystem body_mechanical(const QuasiFrame& frame, const Inertia& in) {
  MechanicalSystem sys;
  sys.frame = frame;
  sys.lagrangian = [in](const Vec&, const Vec& u) {
    return 0.5 * (in.i1 * u(0) * u(0) + in.i2 * u(1) * u(1) + in.i3 * u(2) * u(2));
  };
  sys.dq = [](const Vec& q, const Vec&) { return Vec(Vec::Zero(q.size())); };
  sys.du = [in](const Vec&, const Vec& u) {
    return vec({in.i1 * u(0), in.i2 * u(1), in.i3 * u(2)});
  };
  sys.d2_uu = [in](const Vec&, const Vec&) {
    Mat h = Mat::Zero(3, 3);
    h(0, 0) = in.i1;
    h(1, 1) = in.i2;
    h(2, 2) = in.i3;
    return h;
  };
  sys.d2_uq = [](const Vec&, const Vec&) { return Mat(Mat::Zero(3, 3)); };
  return sys;
}

/** Dynamic-layout reference field for a body with principal inertia.  The
 *  adjoint row is the hand-differentiated costate identity kappadot = kappa
 *  x omega with kappa_k = dC/du_k - I_k (I_k j_k + eta_k wdot_k). */
Vec body_dynamic_reference(const Inertia& in, const Vec& x) {
  const Vec q = x.segment(0, 3), u = x.segment(3, 3), a = x.segment(6, 3),
            j = x.segment(9, 3);
  const auto m = body_torque(in, u, a);
  const Eigen::Vector3d mdot = {in.i1 * j(0) + in.eta1() * (a(1) * u(2) + u(1) * a(2)),
                                in.i2 * j(1) + in.eta2() * (a(0) * u(2) + u(0) * a(2)),
                                in.i3 * j(2) + in.eta3() * (a(0) * u(1) + u(0) * a(1))};
  const Eigen::Vector3d wddot = {j(1) * u(2) + 2.0 * a(1) * a(2) + u(1) * j(2),
                                 j(0) * u(2) + 2.0 * a(0) * a(2) + u(0) * j(2),
                                 j(0) * u(1) + 2.0 * a(0) * a(1) + u(0) * j(1)};
  const Eigen::Vector3d kap = {
      m(1) * in.eta2() * u(2) + m(2) * in.eta3() * u(1) -
          in.i1 * (in.i1 * j(0) + in.eta1() * (a(1) * u(2) + u(1) * a(2))),
      m(0) * in.eta1() * u(2) + m(2) * in.eta3() * u(0) -
          in.i2 * (in.i2 * j(1) + in.eta2() * (a(0) * u(2) + u(0) * a(2))),
      m(0) * in.eta1() * u(1) + m(1) * in.eta2() * u(0) -
          in.i3 * (in.i3 * j(2) + in.eta3() * (a(0) * u(1) + u(0) * a(1)))};
  const Eigen::Vector3d omega{u(0), u(1), u(2)};
  const Eigen::Vector3d kxo = kap.cross(omega);

  Vec dx(12);
  dx.segment(0, 3) = euler_qdot(q, u);
  dx.segment(3, 3) = a;
  dx.segment(6, 3) = j;
  dx(9) = (mdot(1) * in.eta2() * u(2) + m(1) * in.eta2() * a(2) +
           mdot(2) * in.eta3() * u(1) + m(2) * in.eta3() * a(1) -
           in.i1 * in.eta1() * wddot(0) - kxo(0)) /
          (in.i1 * in.i1);
  dx(10) = (mdot(0) * in.eta1() * u(2) + m(0) * in.eta1() * a(2) +
            mdot(2) * in.eta3() * u(0) + m(2) * in.eta3() * a(0) -
            in.i2 * in.eta2() * wddot(1) - kxo(1)) /
           (in.i2 * in.i2);
  dx(11) = (mdot(0) * in.eta1() * u(1) + m(0) * in.eta1() * a(1) +
            mdot(1) * in.eta2() * u(0) + m(1) * in.eta2() * a(0) -
            in.i3 * in.eta3() * wddot(2) - kxo(2)) /
           (in.i3 * in.i3);
  return dx;
}

Vec body_mechanics_reference(const Inertia& in, const Vec& x, const Vec& torque) {
  const Vec q = x.segment(0, 3), u = x.segment(3, 3);
  Vec dx(6);
  dx.segment(0, 3) = euler_qdot(q, u);
  dx(3) = (torque(0) - in.eta1() * u(1) * u(2)) / in.i1;
  dx(4) = (torque(1) - in.eta2() * u(0) * u(2)) / in.i2;
  dx(5) = (torque(2) - in.eta3() * u(0) * u(1)) / in.i3;
  return dx;
}

SampleBox euler_chart_box() {
  SampleBox box;
  box.lo = vec({-kPi, -0.5 * kPi + 0.2, -kPi});
  box.hi = vec({kPi, 0.5 * kPi - 0.2, kPi});
  return box;
}

BuiltinModel make_rigid_body(const ModelParams& params) {
  reject_unknown_params(params, {"Ixx", "Iyy", "Izz"}, "rigid_body_dyn");
  Inertia in{params.count("Ixx") ? params.at("Ixx") : 1.0,
             params.count("Iyy") ? params.at("Iyy") : 2.0,
             params.count("Izz") ? params.at("Izz") : 3.0};
  if (!(in.i1 > 0.0 && in.i2 > 0.0 && in.i3 > 0.0))
    throw InvalidProblem("rigid_body_dyn principal inertia must be positive");

  BuiltinModel model;
  model.name = "rigid_body_dyn";
  model.title = "free rigid body, torque-driven";
  model.frame = euler_body_frame();

  Scenario reorient;
  reorient.name = "reorient";
  reorient.summary = "small rest-to-rest attitude change";
  reorient.layout = Layout::dynamic_oc;
  reorient.bc.q0 = vec({0.0, 0.0, 0.0});
  reorient.bc.q1 = vec({0.3, -0.2, 0.1});
  reorient.bc.u0 = vec({0.0, 0.0, 0.0});
  reorient.bc.u1 = vec({0.0, 0.0, 0.0});
  model.scenarios.push_back(reorient);

  model.dynamic = DynamicOCP{model.frame, body_effort_cost(in), reorient.bc};
  model.mechanical = body_mechanical(model.frame, in);
  model.chart_box = euler_chart_box();

  model.reference_rhs = [in](Layout layout, const Vec& x, const Vec& controls) -> Vec {
    if (layout == Layout::mechanics) return body_mechanics_reference(in, x, controls);
    if (layout == Layout::dynamic_oc) return body_dynamic_reference(in, x);
    throw no_layout("rigid_body_dyn", layout);
  };
  return model;
}

BuiltinModel make_sphere(const ModelParams& params) {
  reject_unknown_params(params, {}, "sphere_dyn");
  const Inertia in{1.0, 1.0, 1.0};

  BuiltinModel model;
  model.name = "sphere_dyn";
  model.title = "uniform sphere, torque-driven";
  model.frame = euler_body_frame();

  Scenario reorient;
  reorient.name = "reorient";
  reorient.summary = "rest-to-rest reorientation across half a turn";
  reorient.layout = Layout::dynamic_oc;
  reorient.bc.q0 = vec({0.0, 0.0, 0.0});
  reorient.bc.q1 = vec({kPi, -0.25 * kPi, 0.2 * kPi});
  reorient.bc.u0 = vec({0.0, 0.0, 0.0});
  reorient.bc.u1 = vec({0.0, 0.0, 0.0});
  model.scenarios.push_back(reorient);

  model.dynamic = DynamicOCP{model.frame, body_effort_cost(in), reorient.bc};
  model.mechanical = body_mechanical(model.frame, in);
  model.chart_box = euler_chart_box();

  model.reference_rhs = [in](Layout layout, const Vec& x, const Vec& controls) -> Vec {
    if (layout == Layout::mechanics) return body_mechanics_reference(in, x, controls);
    if (layout != Layout::dynamic_oc) throw no_layout("sphere_dyn", layout);
    // Identity inertia: jerk precesses about the spin, jdot = j x omega.
    const Eigen::Vector3d omega{x(3), x(4), x(5)};
    const Eigen::Vector3d j{x(9), x(10), x(11)};
    Vec dx(12);
    dx.segment(0, 3) = euler_qdot(x.segment(0, 3), x.segment(3, 3));
    dx.segment(3, 3) = x.segment(6, 3);
    dx.segment(6, 3) = j;
    dx.segment(9, 3) = j.cross(omega);
    return dx;
  };
  return model;
}

}  // namespace

bool BuiltinModel::supports(Layout layout) const {
  switch (layout) {
    case Layout::mechanics: return mechanical.has_value();
    case Layout::kinematic_oc: return kinematic.has_value();
    case Layout::dynamic_oc: return dynamic.has_value();
  }
  return false;
}

const Scenario& BuiltinModel::scenario(const std::string& scenario_name) const {
  for (const auto& s : scenarios)
    if (s.name == scenario_name) return s;
  std::string known;
  for (const auto& s : scenarios) known += (known.empty() ? "" : ", ") + s.name;
  throw InvalidProblem(fmt::format("model {} has no scenario '{}' (available: {})",
                                   name, scenario_name, known));
}

BuiltinModel builtin(const std::string& name, const ModelParams& params) {
  if (name == "heisenberg") {
    reject_unknown_params(params, {}, name);
    return make_heisenberg();
  }
  if (name == "vertical_disc_kin") {
    reject_unknown_params(params, {}, name);
    return make_vertical_disc_kin();
  }
  if (name == "vertical_disc_dyn") {
    reject_unknown_params(params, {}, name);
    return make_vertical_disc_dyn();
  }
  if (name == "falling_disc_kin") return make_falling_disc(params);
  if (name == "rigid_body_dyn") return make_rigid_body(params);
  if (name == "sphere_dyn") return make_sphere(params);
  std::string known;
  for (const auto& k : builtin_names()) known += (known.empty() ? "" : ", ") + k;
  throw UnknownModel(fmt::format("unknown model '{}' (available: {})", name, known));
}

std::vector<std::string> builtin_names() {
  return {"heisenberg",       "vertical_disc_kin", "vertical_disc_dyn",
          "falling_disc_kin", "rigid_body_dyn",    "sphere_dyn"};
}

}  // namespace hamel
