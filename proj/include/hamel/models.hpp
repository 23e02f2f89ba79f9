#pragma once

#include <map>
#include <memory>
#include <optional>

#include "hamel/solvers.hpp"

namespace hamel {

/** Axis-aligned box for seeded configuration sampling, chosen per model to
 *  stay inside the chart (away from frame singularities). */
struct SampleBox {
  Vec lo, hi;
};

/** Named boundary-value scenario with a frozen default shooting guess
 *  (empty guess defers to the solver's interpolation policy). */
struct Scenario {
  std::string name;
  std::string summary;
  Layout layout = Layout::kinematic_oc;
  BoundaryConditions bc;
  Vec guess;
  ShootingConfig config;
};

/** Numeric parameter overrides for built-ins.  Unknown keys are rejected.
 *  Supported: falling_disc_kin "r" (contact radius); rigid_body_dyn
 *  "Ixx", "Iyy", "Izz" (principal inertia). */
using ModelParams = std::map<std::string, double>;

/** A built-in system: frame, whichever problem layouts it supports, an
 *  independently transcribed reference right-hand side for each of them,
 *  and its standard scenarios. */
struct BuiltinModel {
  std::string name;
  std::string title;
  QuasiFrame frame;

  std::optional<KinematicOCP> kinematic;
  std::optional<DynamicOCP> dynamic;
  std::optional<MechanicalSystem> mechanical;

  /** Closed-form right-hand side written out by hand for this system,
   *  independent of the generic assembly.  For the mechanics layout the
   *  free-slot forces are passed in `controls` (empty otherwise).  Throws
   *  UnsupportedLayout when the model lacks the layout. */
  std::function<Vec(Layout, const Vec& state, const Vec& controls)>
      reference_rhs;

  SampleBox chart_box;
  std::vector<Scenario> scenarios;

  bool supports(Layout layout) const;
  const Scenario& scenario(const std::string& name) const;
};

/** Construct a built-in by name; throws UnknownModel listing valid names. */
BuiltinModel builtin(const std::string& name, const ModelParams& params = {});

std::vector<std::string> builtin_names();

}  // namespace hamel
