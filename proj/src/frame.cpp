#include "hamel/frame.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

namespace hamel {

namespace {

bool sorted_unique_in_range(std::vector<int> slots, int n) {
  std::sort(slots.begin(), slots.end());
  if (std::adjacent_find(slots.begin(), slots.end()) != slots.end()) return false;
  return slots.empty() || (slots.front() >= 0 && slots.back() < n);
}

}  // namespace

QuasiFrame::QuasiFrame(int n, int m, PsiFn psi)
    : QuasiFrame(n, m, std::move(psi), Options{}) {}

QuasiFrame::QuasiFrame(int n, int m, PsiFn psi, Options opts)
    : n_(n),
      m_(m),
      psi_(std::move(psi)),
      psi_jac_(std::move(opts.psi_jacobian)),
      fd_step_(opts.fd_step),
      constrained_(std::move(opts.constrained_slots)) {
  if (n_ < 1 || m_ < 0 || m_ >= n_)
    throw InvalidProblem(fmt::format(
        "frame dimensions n={}, m={} out of range (need 0 <= m < n)", n_, m_));
  if (!psi_) throw InvalidProblem("frame requires a Psi callback");
  if (fd_step_ <= 0.0) throw InvalidProblem("frame fd_step must be positive");
  if (constrained_.empty()) {
    constrained_.resize(m_);
    std::iota(constrained_.begin(), constrained_.end(), 0);
  }
  if (static_cast<int>(constrained_.size()) != m_ ||
      !sorted_unique_in_range(constrained_, n_))
    throw InvalidProblem(
        fmt::format("constrained slot list must hold {} distinct slots in 1..{}", m_, n_));
  std::sort(constrained_.begin(), constrained_.end());
  for (int i = 0; i < n_; ++i)
    if (!std::binary_search(constrained_.begin(), constrained_.end(), i))
      free_.push_back(i);
}

void QuasiFrame::check_q(const Vec& q, const char* op) const {
  if (q.size() != n_)
    throw InvalidProblem(fmt::format("{}: q length {}, expected {}", op, q.size(), n_));
}

Mat QuasiFrame::psi_at(const Vec& q) const {
  check_q(q, "psi_at");
  Mat psi = psi_(q);
  if (psi.rows() != n_ || psi.cols() != n_)
    throw InvalidProblem(fmt::format("Psi callback returned {}x{}, expected {}x{}",
                                     psi.rows(), psi.cols(), n_, n_));
  if (!psi.allFinite())
    throw SingularFrame(fmt::format("Psi(q) has non-finite entries at q = [{}]",
                                    fmt::join(q.data(), q.data() + q.size(), ", ")));
  return psi;
}

Mat QuasiFrame::phi_at(const Vec& q) const { return evaluate_basic(q).second; }

std::pair<Mat, Mat> QuasiFrame::evaluate_basic(const Vec& q) const {
  Mat psi = psi_at(q);
  Eigen::PartialPivLU<Mat> lu(psi);
  Mat phi = lu.solve(Mat::Identity(n_, n_));
  // cond_inf = |Psi| |Psi^-1|; covers exact singularity via inf/nan too.
  double cond = psi.cwiseAbs().rowwise().sum().maxCoeff() *
                phi.cwiseAbs().rowwise().sum().maxCoeff();
  if (!phi.allFinite() || cond > kFrameConditionLimit)
    throw SingularFrame(fmt::format(
        "Psi(q) condition {:.3e} exceeds {:.0e} at q = [{}]", cond,
        kFrameConditionLimit, fmt::join(q.data(), q.data() + q.size(), ", ")));
  return {std::move(psi), std::move(phi)};
}

Tensor3 QuasiFrame::psi_jacobian_at(const Vec& q) const {
  if (psi_jac_) {
    Tensor3 d = psi_jac_(q);
    if (d.extent() != n_)
      throw InvalidProblem(fmt::format("Psi Jacobian callback extent {}, expected {}",
                                       d.extent(), n_));
    return d;
  }
  // Central differences, step scaled once by the configuration magnitude.
  const double h = fd_step_ * std::max(1.0, q.cwiseAbs().maxCoeff());
  Tensor3 d(n_);
  Vec qp = q, qm = q;
  for (int k = 0; k < n_; ++k) {
    qp(k) = q(k) + h;
    qm(k) = q(k) - h;
    Mat diff = (psi_at(qp) - psi_at(qm)) / (2.0 * h);
    for (int s = 0; s < n_; ++s)
      for (int i = 0; i < n_; ++i) d(s, i, k) = diff(s, i);
    qp(k) = q(k);
    qm(k) = q(k);
  }
  return d;
}

Tensor3 QuasiFrame::hamel_at(const Vec& q) const { return evaluate(q).gamma; }

FrameData QuasiFrame::evaluate(const Vec& q) const {
  auto [psi, phi] = evaluate_basic(q);
  Tensor3 dpsi = psi_jacobian_at(q);

  // gamma^s_(p,q) = (dPsi^s_i/dq^j - dPsi^s_j/dq^i) Phi^i_p Phi^j_q,
  // assembled through the intermediate B^s_(i,q) = A^s_(i,j) Phi^j_q.
  Tensor3 gamma(n_);
  Mat a(n_, n_), b(n_, n_);
  for (int s = 0; s < n_; ++s) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) a(i, j) = dpsi(s, i, j) - dpsi(s, j, i);
    b = a * phi;
    Mat g = phi.transpose() * b;
    // Antisymmetry in the lower pair holds analytically; enforce it exactly.
    for (int p = 0; p < n_; ++p)
      for (int r = 0; r < n_; ++r) gamma(s, p, r) = 0.5 * (g(p, r) - g(r, p));
  }
  return FrameData{std::move(psi), std::move(phi), std::move(gamma)};
}

Vec QuasiFrame::to_quasi(const Vec& q, const Vec& qdot) const {
  check_q(q, "to_quasi");
  if (qdot.size() != n_)
    throw InvalidProblem(fmt::format("to_quasi: qdot length {}, expected {}", qdot.size(), n_));
  return psi_at(q) * qdot;
}

Vec QuasiFrame::from_quasi(const Vec& q, const Vec& u) const {
  check_q(q, "from_quasi");
  if (u.size() != n_)
    throw InvalidProblem(fmt::format("from_quasi: u length {}, expected {}", u.size(), n_));
  return phi_at(q) * u;
}

Vec QuasiFrame::constraint_residual(const Vec& q, const Vec& qdot) const {
  Vec u = to_quasi(q, qdot);
  Vec res(m_);
  for (int s = 0; s < m_; ++s) res(s) = u(constrained_[s]);
  return res;
}

Vec QuasiFrame::full_from_free(const Vec& u_free) const {
  if (u_free.size() != free_count())
    throw InvalidProblem(fmt::format("free vector length {}, expected {}", u_free.size(),
                                     free_count()));
  Vec full = Vec::Zero(n_);
  for (size_t k = 0; k < free_.size(); ++k) full(free_[k]) = u_free(k);
  return full;
}

Vec QuasiFrame::free_from_full(const Vec& full) const {
  if (full.size() != n_)
    throw InvalidProblem(fmt::format("full vector length {}, expected {}", full.size(), n_));
  Vec out(free_count());
  for (size_t k = 0; k < free_.size(); ++k) out(k) = full(free_[k]);
  return out;
}

}  // namespace hamel
