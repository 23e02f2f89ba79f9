#pragma once

#include <functional>

#include "hamel/core.hpp"

namespace hamel {

/** True when compiled with OpenMP. */
bool openmp_enabled();
int max_threads();

/** Forward-difference Jacobian of F at x, one trajectory-style evaluation
 *  per column.  Columns are independent, so the OpenMP path produces the
 *  same matrix bit-for-bit as the serial path; the serial path is the
 *  testing reference.  Column step: fd_step * max(1, |x_k|). */
Mat fd_jacobian(const std::function<Vec(const Vec&)>& F, const Vec& x,
                const Vec& Fx, double fd_step, bool parallel);

/** Evaluate fn(i) for i in [0, count) into a dense result table.  Parallel
 *  path bitwise-matches the serial one (independent slots).  Exceptions are
 *  captured per slot and the lowest-index one is rethrown after the join. */
std::vector<double> map_indexed(int count, const std::function<double(int)>& fn,
                                bool parallel);

}  // namespace hamel
