#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sweep/constraint.hpp"

namespace sweep {

struct CertifyOptions {
  int n_boundary = 512;       // boundary samples per parameter
  int n_pairs = 4096;         // sample pairs for the monotonicity defect
  int n_box = 2048;           // tube box samples for gradient bounds
  int n_params = 8;           // parameter draws from the parameter box
  std::uint64_t seed = 1u;
  double lambda_floor = 1e-6;
  double floor_safety = 0.95;      // shrink on lower bounds (gradient floor)
  double lipschitz_safety = 1.05;  // inflate on upper bounds
  double tube_level = 1.8;         // working tube: G <= tube_level
  double constant_floor = 1e-12;   // witnessed floor for vanishing constants
  std::vector<double> coercivity_rhos = {0.1, 0.5};
  // Parameter box (per-component lo/hi).  Empty means: certify at the
  // explicit parameter values in w_samples.
  std::vector<double> w_lo, w_hi;
  std::vector<Vec> w_samples;
};

struct ClauseResult {
  std::string name;
  bool pass = false;
  double estimate = 0.0;
  double worst = 0.0;       // most binding sampled value
  std::string witness;      // where the worst value occurred
  int samples = 0;
};

struct CertificationReport {
  ConstantsBundle constants;
  std::vector<ClauseResult> clauses;
  CertifyOptions options;
  std::string family;
  bool all_pass = false;

  [[nodiscard]] const ClauseResult* clause(const std::string& name) const;
};

// Smallest sampled |grad_x G| over the unit level surface, shrunk by the
// floor safety factor.
[[nodiscard]] double estimate_gradient_floor(const LevelSetConstraint& cons,
                                             const CertifyOptions& opts);

// Smallest monotonicity defect lambda (>= lambda_floor) validating
// <grad G(x) - grad G(z), x - z> >= -lambda |x - z|^2 over sampled pairs
// with x on the boundary and z in the set, inflated by the safety factor.
[[nodiscard]] double estimate_hypomonotonicity(const LevelSetConstraint& cons,
                                               const CertifyOptions& opts);

struct ParamConstants {
  double L = 0.0;
  double K0 = 0.0;
  double K1 = 0.0;
  double C0 = 0.0;
  double C1 = 0.0;
};

// Parameter sensitivity and gradient bounds over the working tube.
[[nodiscard]] ParamConstants estimate_param_constants(const LevelSetConstraint& cons,
                                                      const CertifyOptions& opts);

// Spot check of the declared linear coercivity G - 1 >= kappa * rho at the
// listed distances; returns per-rho worst margins.  Points closer than the
// hinted tube radius come from exact normal rays, farther ones from beyond
// the bounding sphere where the distance is still certain.
struct CoercivityCheck {
  bool pass = false;
  bool checked = false;  // false when the family declares no rate
  double kappa = 0.0;
  std::vector<double> rhos;
  std::vector<double> worst_margins;
  std::string witness;
};
[[nodiscard]] CoercivityCheck check_coercivity(const LevelSetConstraint& cons,
                                               const CertifyOptions& opts,
                                               double prox_radius_hint = 0.0);

// Full pipeline: estimates every constant, re-verifies each clause on a
// fresh sample of the same size, and assembles the bundle with
// r = c / lambda exactly.
[[nodiscard]] CertificationReport certify(const LevelSetConstraint& cons,
                                          const CertifyOptions& opts);

// Re-checks an existing bundle on fresh samples drawn with `fresh_seed`;
// returns the number of violated samples (0 means the bundle held).
[[nodiscard]] int verify_bundle(const LevelSetConstraint& cons,
                                const ConstantsBundle& bundle,
                                const CertifyOptions& opts, std::uint64_t fresh_seed);

// Convenience: certify and install the resulting constants on a copy.
[[nodiscard]] LevelSetConstraint with_certified_constants(LevelSetConstraint cons,
                                                          const CertifyOptions& opts);

[[nodiscard]] std::string certification_report_json(const CertificationReport& report);

}  // namespace sweep
