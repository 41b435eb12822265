#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sweep/sweep_implicit.hpp"

namespace sweep {

struct StudyResult {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, double> stats;
  bool pass = false;
  std::string detail;
};

[[nodiscard]] std::string study_csv(const StudyResult& result);
[[nodiscard]] std::string study_json(const StudyResult& result);

// Deterministic piecewise-linear perturbation shape on `segments` equal
// pieces, scaled to unit W11 size, then interpolated onto `grid`.
[[nodiscard]] PLPath pl_noise_shape(const TimeGrid& grid, int dim, int segments,
                                    std::uint64_t seed);

// Uniform grid with interior nodes shifted by `offset` times the step, so
// events sitting on round time values stay strictly inside steps at every
// midpoint-insertion refinement level.
[[nodiscard]] TimeGrid offset_uniform_grid(double t_end, std::size_t steps,
                                           double offset);

struct ContinuityOptions {
  std::vector<double> scales = {1e-1, 1e-2, 1e-3, 1e-4};
  std::uint64_t seed = 7;
  int shape_segments = 8;
  bool perturb_w = true;
  double floor_multiplier = 10.0;
  double ratio_guard = 2.0;  // alternative pass: the response ratio at the
                             // smallest scale stays within this factor of
                             // the largest-scale ratio
  SolveOptions solver;
};

// Output W11 distance under shrinking input perturbations; passes when the
// distances decrease monotonically and either end below the multiplier
// times the cross-scheme gap of the unperturbed problem at the same grid,
// or keep a bounded response ratio all the way down (the relevant branch
// when both schemes are exact and the gap floor is zero).
[[nodiscard]] StudyResult continuity_study(const SweepProblem& base,
                                           const ContinuityOptions& opts = {});

struct LipschitzOptions {
  std::vector<double> scales = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  std::uint64_t seed = 11;
  int shape_segments = 8;
  bool perturb_w = false;
  double ratio_spread_limit = 4.0;
  double step_margin_tol = 1e-6;  // relative to the trajectory scale
  SolveOptions solver;
};

// Ratio of output to input W11 distance across scales, plus a per-step
// audit of the local stability inequality with certified constants.
// Steps whose contact regime differs between the two runs (the discrete
// activation band) are flagged and excluded from the audit margin.
[[nodiscard]] StudyResult lipschitz_study(const SweepProblem& base,
                                          const LipschitzOptions& opts = {});

struct ImplicitLipschitzOptions {
  std::vector<double> scales = {1e-2, 5e-3, 2.5e-3};
  std::uint64_t seed = 13;
  int shape_segments = 8;
  double ratio_spread_limit = 4.0;
  PicardOptions picard;
};

// Same ratio protocol for the fixed-point solver, with the a-priori
// exponential stability constant reported alongside.
[[nodiscard]] StudyResult implicit_lipschitz_study(const ImplicitProblem& base,
                                                   const ImplicitLipschitzOptions& opts = {});

struct ConvergenceOrderOptions {
  int levels = 3;              // grids h, h/2, ..., by uniform step splitting
  std::uint64_t seed = 17;
  bool oracle_is_reference = false;  // oracle came from a fine run of the
                                     // same scheme; orders use differences
  SolveOptions solver;
};

// Errors against an oracle path (exact solution or fine-grid reference)
// under grid halving; reports sup and W11 errors and empirical orders.
// Without an oracle, orders come from successive solution differences.
[[nodiscard]] StudyResult convergence_order_study(const SweepProblem& base,
                                                  const PLPath* oracle_xi,
                                                  const ConvergenceOrderOptions& opts = {});

struct ConsistencyOptions {
  int levels = 3;
  double shrink_requirement = 1.8;
  SolveOptions solver;
};

// W11 gap between the two time-stepping schemes under grid halving; passes
// when the gap shrinks by at least the required factor per halving.
[[nodiscard]] StudyResult scheme_consistency_study(const SweepProblem& base,
                                                   const ConsistencyOptions& opts = {});

// Base problem with input (and optionally parameter) path perturbed by the
// seeded shape at the given scale.  Used by the studies and shared with
// tests so protocols stay reproducible.
[[nodiscard]] SweepProblem perturbed_problem(const SweepProblem& base, double scale,
                                             std::uint64_t seed, int segments,
                                             bool perturb_w);

}  // namespace sweep
