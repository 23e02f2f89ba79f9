#pragma once

#include "hamel/models.hpp"

namespace hamel {

struct CheckResult {
  std::string name;
  bool pass = false;
  double max_abs_error = 0.0;
  double threshold = 0.0;
  int samples = 0;
  std::string note;
};

/** Deterministic, JSON-serializable bundle of check outcomes. */
struct VerificationReport {
  std::string subject;
  uint64_t seed = kDefaultSeed;
  std::vector<CheckResult> checks;

  bool all_pass() const;
  std::string to_json() const;
  void merge(const VerificationReport& other);
};

struct VerifyOptions {
  int samples = 200;
  uint64_t seed = kDefaultSeed;
  bool parallel = true;
};

/** Structural frame checks over seeded samples of the box: |Psi Phi - I|,
 *  gamma antisymmetry of the delivered tensor, FD-vs-analytic gamma
 *  agreement.  Singular draws are recorded as failed checks, not thrown. */
VerificationReport check_frame(const QuasiFrame& frame, const SampleBox& box,
                               const VerifyOptions& opts = {});

/** Max |assembled - reference| over seeded random states (and random
 *  forces for the mechanics layout) inside the model's chart box. */
VerificationReport compare_rhs(const BuiltinModel& model, Layout layout,
                               const VerifyOptions& opts = {});

/** Model-specific invariants along an integrated trajectory: constraint
 *  residual by construction, multiplier constancy, conserved quantities
 *  (energy, momentum norm, circle radius, jerk first integral). */
VerificationReport monitor(const BuiltinModel& model, const Trajectory& traj);

/** Re-shoots the boundary problem from seeded perturbations (|delta| = 1e-3)
 *  of the converged unknowns and reports the minimum cost delta across the
 *  probes that converge.  A stationary solution never admits a delta below
 *  -1e-8.  Unsolvable probes are recorded, not raised. */
VerificationReport stationarity_probe(const BuiltinModel& model,
                                      const Scenario& scenario,
                                      const ShootResult& solution, int probes,
                                      uint64_t seed = kDefaultSeed);

/** Runs every applicable check suite for one model (used by the CLI). */
VerificationReport verify_model(const BuiltinModel& model,
                                const VerifyOptions& opts = {});

}  // namespace hamel
