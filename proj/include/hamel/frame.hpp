#pragma once

#include <functional>
#include <utility>

#include "hamel/core.hpp"

namespace hamel {

/** Everything frame-dependent that one right-hand-side evaluation needs,
 *  computed in a single pass at a fixed q. */
struct FrameData {
  Mat psi;        // u = Psi qdot
  Mat phi;        // qdot = Phi u, Phi = Psi^-1
  Tensor3 gamma;  // Hamel coefficients, antisymmetric in the lower pair
};

/** Quasi-velocity frame u = Psi(q) qdot on an n-dof configuration space.
 *
 *  m of the n quasi-velocities are nonholonomic constraints (u = 0 on the
 *  constraint manifold).  By default these occupy slots 1..m; a model may
 *  declare any slot set instead (the rolling disc on an inclined contact
 *  uses the last two).  Slot numbering is 0-based internally and 1-based in
 *  every message. */
class QuasiFrame {
public:
  using PsiFn = std::function<Mat(const Vec& q)>;
  /** dPsi(s,i,k) = d Psi^s_i / d q^k. */
  using PsiJacFn = std::function<Tensor3(const Vec& q)>;

  struct Options {
    PsiJacFn psi_jacobian;             // analytic; FD fallback when absent
    double fd_step = 1e-5;             // relative base step for the fallback
    std::vector<int> constrained_slots;  // 0-based; default 0..m-1
  };

  /** Empty frame; every evaluation fails until a real one is assigned. */
  QuasiFrame() = default;

  QuasiFrame(int n, int m, PsiFn psi);
  QuasiFrame(int n, int m, PsiFn psi, Options opts);

  int dof() const { return n_; }
  int constraint_count() const { return m_; }
  int free_count() const { return n_ - m_; }
  const std::vector<int>& constrained_slots() const { return constrained_; }
  const std::vector<int>& free_slots() const { return free_; }
  bool has_analytic_jacobian() const { return static_cast<bool>(psi_jac_); }
  double fd_step() const { return fd_step_; }

  /** Psi(q); throws SingularFrame on non-finite entries. */
  Mat psi_at(const Vec& q) const;
  /** Phi(q) = Psi(q)^-1; throws SingularFrame when cond(Psi) > 1e8. */
  Mat phi_at(const Vec& q) const;
  /** Hamel coefficients gamma(s,p,q) at q, explicitly antisymmetrized in
   *  (p,q).  Uses the analytic Psi Jacobian when supplied, else central
   *  finite differences with step fd_step * max(1, |q|_inf). */
  Tensor3 hamel_at(const Vec& q) const;
  /** One-pass Psi/Phi/gamma evaluation sharing a single factorization. */
  FrameData evaluate(const Vec& q) const;

  Vec to_quasi(const Vec& q, const Vec& qdot) const;    // u = Psi qdot
  Vec from_quasi(const Vec& q, const Vec& u) const;     // qdot = Phi u
  /** Constrained components of Psi qdot, in slot order (m-vector). */
  Vec constraint_residual(const Vec& q, const Vec& qdot) const;

  /** Scatter free-slot values into a full u vector (constrained slots 0). */
  Vec full_from_free(const Vec& u_free) const;
  /** Gather the free slots of a full n-vector. */
  Vec free_from_full(const Vec& full) const;

private:
  std::pair<Mat, Mat> evaluate_basic(const Vec& q) const;  // Psi, Phi
  Tensor3 psi_jacobian_at(const Vec& q) const;
  void check_q(const Vec& q, const char* op) const;

  int n_ = 0, m_ = 0;
  PsiFn psi_;
  PsiJacFn psi_jac_;
  double fd_step_ = 1e-5;
  std::vector<int> constrained_, free_;
};

/** Condition threshold beyond which a frame counts as singular. */
inline constexpr double kFrameConditionLimit = 1e8;

}  // namespace hamel
