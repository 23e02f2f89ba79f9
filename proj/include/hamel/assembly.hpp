#pragma once

#include "hamel/problem.hpp"

namespace hamel {

enum class Layout { mechanics, kinematic_oc, dynamic_oc };

const char* layout_name(Layout layout);
Layout layout_from_name(const std::string& name);

/** Offsets of the flat phase vector for a given frame and layout.
 *
 *    mechanics:     (q, u_free)                     length 2n - m
 *    kinematic_oc:  (q, u_free, mu)                 length 2n
 *    dynamic_oc:    (q, u_free, a_free, j_free, mu) length 4n - 2m
 *
 *  u/a/j blocks are ordered by free slot, mu by constrained slot. */
struct StateLayout {
  StateLayout(Layout kind, int n, int m);

  Layout kind;
  int n, m, f;  // f = n - m free slots
  int size() const;

  int q_offset() const { return 0; }
  int u_offset() const { return n; }
  int a_offset() const;   // dynamic_oc only
  int j_offset() const;   // dynamic_oc only
  int mu_offset() const;  // kinematic_oc / dynamic_oc

  Vec q(const Vec& x) const { return x.segment(q_offset(), n); }
  Vec u(const Vec& x) const { return x.segment(u_offset(), f); }
  Vec a(const Vec& x) const { return x.segment(a_offset(), f); }
  Vec j(const Vec& x) const { return x.segment(j_offset(), f); }
  Vec mu(const Vec& x) const { return x.segment(mu_offset(), m); }
};

/** Forced Boltzmann-Hamel equations of motion.
 *
 *  State (q, u_free); the free accelerations solve
 *    M udot = Q + dL/dtheta + dL/du_j gamma^j_(K, I) u^K - d2L/dudq qdot
 *  with M the free-free block of d2L/du du, all partials taken on the
 *  unconstrained Lagrangian and constraints applied afterwards.
 *  forces(t) supplies the free-slot quasi-forces Q_I. */
Vec mechanics_rhs(const MechanicalSystem& sys,
                  const std::function<Vec(double)>& forces, double t,
                  const Vec& state);

/** First-order field of the kinematic optimal control reduction:
 *  state (q, u_free, mu), length 2n. */
Vec kinematic_rhs(const KinematicOCP& ocp, const Vec& state);

/** Costate-like vector kappa_J = dC/du_J - d/dt dC/da_J with the time
 *  derivative chain-rule expanded through (q, u, a, j). */
Vec kappa(const DynamicOCP& ocp, const Vec& q, const Vec& u, const Vec& a,
          const Vec& j);

/** First-order field of the dynamic optimal control reduction:
 *  state (q, u_free, a_free, j_free, mu), length 4n - 2m. */
Vec dynamic_rhs(const DynamicOCP& ocp, const Vec& state);

/** Quasi-forces Q_I realizing a given free acceleration, from the forced
 *  Boltzmann-Hamel equations read in reverse. */
Vec recover_controls(const MechanicalSystem& sys, const Vec& q, const Vec& u,
                     const Vec& udot);

}  // namespace hamel
