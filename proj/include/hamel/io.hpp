#pragma once

#include <iosfwd>
#include <optional>

#include "hamel/models.hpp"

namespace hamel {

/** Summary block shared by the CSV comment header and the JSON export. */
struct SolveInfo {
  std::string model, scenario;
  bool converged = true;
  double residual_norm = 0.0;
  int iterations = 0;
  double cost = 0.0;
  Vec unknowns;
};

/** Writes `t,q1..qn,u<free>,a<free>,j<free>,mu<slot>,Q<free>` rows with
 *  17-significant-digit values.  Control columns appear when the model has
 *  a mechanical system and the layout carries accelerations.  A
 *  `# converged=false` comment precedes the header for best-effort output. */
void write_csv(std::ostream& os, const BuiltinModel& model,
               const Trajectory& traj, const SolveInfo& info);

/** Full diagnostics: info block, per-step states, constraint residuals,
 *  recovered controls. */
void write_json(std::ostream& os, const BuiltinModel& model,
                const Trajectory& traj, const SolveInfo& info);

/** Reads a trajectory back from write_csv output (comments skipped).
 *  Column names are checked against the model/layout. */
Trajectory read_csv(std::istream& is, const BuiltinModel& model,
                    Layout layout);

/** Column labels for one layout of a model, in file order. */
std::vector<std::string> csv_columns(const BuiltinModel& model, Layout layout);

/** Recovered quasi-forces along a dynamic trajectory (one row per step).
 *  Empty for models without a mechanical system. */
std::vector<Vec> recovered_controls(const BuiltinModel& model,
                                    const Trajectory& traj);

}  // namespace hamel
