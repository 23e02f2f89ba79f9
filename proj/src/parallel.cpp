#include "hamel/parallel.hpp"

#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hamel {

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

/** Run fn(i) for i in [0, count); exceptions land in slots[i].  The loop
 *  body never throws across the parallel region. */
void run_indexed(int count, const std::function<void(int)>& body, bool parallel,
                 std::vector<std::exception_ptr>& slots) {
  slots.assign(static_cast<size_t>(count), nullptr);
  if (parallel && openmp_enabled()) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        slots[static_cast<size_t>(i)] = std::current_exception();
      }
    }
#endif
  } else {
    for (int i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        slots[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : slots)
    if (e) std::rethrow_exception(e);
}

}  // namespace

Mat fd_jacobian(const std::function<Vec(const Vec&)>& F, const Vec& x,
                const Vec& Fx, double fd_step, bool parallel) {
  const int cols = static_cast<int>(x.size());
  Mat jac(Fx.size(), cols);
  std::vector<std::exception_ptr> errors;
  run_indexed(
      cols,
      [&](int k) {
        const double h = fd_step * std::max(1.0, std::abs(x(k)));
        Vec xk = x;
        xk(k) += h;
        jac.col(k) = (F(xk) - Fx) / h;
      },
      parallel, errors);
  return jac;
}

std::vector<double> map_indexed(int count, const std::function<double(int)>& fn,
                                bool parallel) {
  std::vector<double> out(static_cast<size_t>(count), 0.0);
  std::vector<std::exception_ptr> errors;
  run_indexed(
      count, [&](int i) { out[static_cast<size_t>(i)] = fn(i); }, parallel,
      errors);
  return out;
}

}  // namespace hamel
