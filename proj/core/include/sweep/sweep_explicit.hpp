#pragma once

#include <cstdint>
#include <iosfwd>

#include "sweep/constraint.hpp"
#include "sweep/pl_path.hpp"

namespace sweep {

// Variational evolution driven by an input path u and a moving constraint
// Z(w): the state x = u - xi stays in Z(w(t)) and the deficit xi moves
// only while x presses against the boundary, along the outward normal.
struct SweepProblem {
  SweepProblem(LevelSetConstraint cons, PLPath u_in, PLPath w_in, Vec x0_in);

  // Same problem with every step split into `factor` substeps (inputs are
  // piecewise linear, so the refined problem is pointwise identical).
  [[nodiscard]] SweepProblem refined(std::size_t factor) const;

  LevelSetConstraint constraint;
  PLPath u;  // dim = state_dim, shares the grid with w
  PLPath w;  // dim = param_dim
  Vec x0;
};

enum class Scheme { catching_up, boundary_ode };

[[nodiscard]] const char* to_string(Scheme s);

struct SolveOptions {
  Scheme scheme = Scheme::catching_up;
  double activation_tol = 1e-8;  // |G - 1| band counting as boundary contact
  int vi_samples = 64;           // membership samples per step for the VI audit
  std::uint64_t seed = 0;
  double gate_fraction = 0.5;    // admissible per-step motion as fraction of r
  bool gate_use_sampled_rate = false;  // sampled Hausdorff rate instead of the
                                       // certified formula in the step gate
  bool record_compensator = true;
  ProjectionOptions projection;
};

struct StepRecord {
  bool active = false;       // end-of-step state presses the boundary
  double drive_a = 0.0;      // <xi', grad_x G>
  double drive_b = 0.0;      // <u', grad_x G> + <w', grad_w G>
  double xi_dot_norm = 0.0;
  double g_value = 0.0;      // G at the end-of-step state
  double vi_residual = 0.0;  // worst sampled obtuse-angle margin
  Vec compensator;           // boundary-drift compensator, empty if disabled
  double g_pre_projection = 0.0;   // boundary-ode: level before re-projection
  double g_post_projection = 0.0;  // and after (equal when no projection ran)
};

struct Trajectory {
  PLPath x;
  PLPath xi;
  std::vector<StepRecord> steps;
  Scheme scheme = Scheme::catching_up;
  double rate_scale = 0.0;  // max over steps of |u'| + (K1/c)|w'|
  double diag_scale = 0.0;  // tolerance scale for residual checks
};

[[nodiscard]] Trajectory solve_catching_up(const SweepProblem& prob,
                                           const SolveOptions& opts = {});
[[nodiscard]] Trajectory solve_boundary_ode(const SweepProblem& prob,
                                            const SolveOptions& opts = {});
[[nodiscard]] Trajectory solve(const SweepProblem& prob, const SolveOptions& opts);

// Rate used by the step gate: per-step motion |du| + rate * |dw| must stay
// under gate_fraction * r.
[[nodiscard]] double gate_rate(const SweepProblem& prob, bool use_sampled,
                               std::uint64_t seed);

struct DriveTerms {
  double a = 0.0;
  double b = 0.0;
};

// Normal and tangential drive at step k, evaluated at the end-of-step state.
[[nodiscard]] DriveTerms drive_terms(const SweepProblem& prob, const Trajectory& traj,
                                     std::size_t k);

struct RateBoundReport {
  double worst_margin = 0.0;  // min over steps of bound - |xi'|
  std::size_t worst_step = 0;
  double scale = 1.0;
  bool pass = false;  // worst_margin >= -1e-6 * scale
};

// Audits |xi'| <= |u'| + (K1/c)|w'| step by step.
[[nodiscard]] RateBoundReport rate_bound_check(const SweepProblem& prob,
                                               const Trajectory& traj);

// Worst obtuse-angle margin at step k over `n_z` fresh membership samples.
[[nodiscard]] double vi_residual(const SweepProblem& prob, const Trajectory& traj,
                                 std::size_t k, int n_z, std::uint64_t seed);

struct ViReport {
  double worst = 0.0;
  std::size_t worst_step = 0;
  double scale = 1.0;
  bool pass = false;  // worst >= -1e-6 * scale
};

[[nodiscard]] ViReport vi_check(const SweepProblem& prob, const Trajectory& traj,
                                int n_z, std::uint64_t seed);

// Drift compensator s making <xi', x' + s> vanish along the motion:
//   s = grad_x G * <w', grad_w G> / (dist(x, boundary) + |grad_x G|^2).
[[nodiscard]] Vec compensator(const Vec& x, const Vec& w, const Vec& w_dot,
                              const LevelSetConstraint& cons,
                              const ProjectionOptions& opts = {});

// Columns: t, x0.., xi0.., active, G, B, xidot_norm, vi_residual.  The
// step-indexed fields are attached to the row closing the step; the first
// row carries zeros for them.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace sweep
