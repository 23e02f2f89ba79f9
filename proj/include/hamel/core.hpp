#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hamel {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/** Dense rank-3 tensor with all three extents equal to n.
 *  Used for the Hamel coefficients gamma(s,p,q) and for dPsi(s,i,k) =
 *  d Psi^s_i / d q^k.  Storage is flat row-major in (s,i,k). */
class Tensor3 {
public:
  Tensor3() : n_(0) {}
  explicit Tensor3(int n) : n_(n), v_(static_cast<size_t>(n) * n * n, 0.0) {}

  int extent() const { return n_; }
  double& operator()(int s, int i, int k) { return v_[idx(s, i, k)]; }
  double operator()(int s, int i, int k) const { return v_[idx(s, i, k)]; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

private:
  size_t idx(int s, int i, int k) const {
    return (static_cast<size_t>(s) * n_ + i) * n_ + k;
  }
  int n_;
  std::vector<double> v_;
};

/** Base error type.  Context lines can be attached while an exception
 *  propagates (e.g. the integrator adds the failing step index) without
 *  losing the concrete type: catch by reference, add_context, rethrow. */
class Error : public std::exception {
public:
  explicit Error(std::string msg) : msg_(std::move(msg)) {}
  const char* what() const noexcept override { return msg_.c_str(); }
  void add_context(const std::string& ctx) { msg_ = ctx + ": " + msg_; }

private:
  std::string msg_;
};

/** Frame matrix Psi(q) not invertible (or conditioning beyond 1e8) at q. */
class SingularFrame : public Error {
public:
  using Error::Error;
};

/** Quasi-velocity mass matrix (or cost Hessian block) not solvable. */
class SingularMass : public Error {
public:
  using Error::Error;
};

/** Problem definition rejected by validation; message lists field issues. */
class InvalidProblem : public Error {
public:
  using Error::Error;
};

/** Shooting failed to reach tolerance; carries the best residual seen and
 *  the unknowns that produced it (for best-effort output). */
class NoConvergence : public Error {
public:
  NoConvergence(std::string msg, double best_residual, int iterations)
      : Error(std::move(msg)),
        best_residual(best_residual),
        iterations(iterations) {}
  double best_residual;
  int iterations;
  Vec best_unknowns;
};

/** Shooting Jacobian unusable (non-finite entries). */
class SingularJacobian : public Error {
public:
  using Error::Error;
};

/** Requested built-in model name does not exist. */
class UnknownModel : public Error {
public:
  using Error::Error;
};

/** Operation asked for a layout the model does not provide. */
class UnsupportedLayout : public Error {
public:
  using Error::Error;
};

/** Log levels selected by the HAMEL_OC_LOG environment variable
 *  (off | info | debug, default off).  Messages go to stderr. */
enum class LogLevel { off = 0, info = 1, debug = 2 };

LogLevel log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

/** Default seed for every seeded sampling facility. */
inline constexpr uint64_t kDefaultSeed = 0xB01;

}  // namespace hamel
