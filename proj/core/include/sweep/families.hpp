#pragma once

#include <cstdint>

#include "sweep/constraint.hpp"
#include "sweep/sweep_implicit.hpp"

namespace sweep {

// C2 level saturation: identity up to 2, constant 3 from 4 on, monotone
// smoothstep-rate blend in between.  Composing it onto a raw level function
// leaves the set, the unit level surface and every working-tube constant
// unchanged while making gradients globally bounded.
[[nodiscard]] double saturate_level(double s);
[[nodiscard]] double saturate_level_slope(double s);

// Scalar play interval [w - rho, w + rho] written as the sublevel set of
// the saturated quadratic ((x - w)/rho)^2.  state_dim = param_dim = 1.
[[nodiscard]] LevelSetConstraint make_scalar_play(double rho);

// Euclidean ball of radius rho centered at the parameter, any dimension.
[[nodiscard]] LevelSetConstraint make_moving_ball(int dim, double rho);

// Planar star-shaped set with polar radius R0 (1 + a cos k(theta - phi)),
// parameter w = (center_x, center_y, phi).  Non-convex for a(k^2 - 1) > 1.
// Requires 0 <= a < 1 so the radius stays positive; the uniqueness tube is
// certified at runtime rather than assumed from the parameters.
[[nodiscard]] LevelSetConstraint make_star_set(double R0, double a, int k);

// Exact deficit path of the scalar play with piecewise-linear input and
// window center: clamp recursion on the merged grid with every window
// crossing inserted as a node, so the result is the continuum solution.
[[nodiscard]] PLPath play_oracle(const PLPath& u, const PLPath& w_center, double rho,
                                 double x0);

// Affine feedback g(t, u, xi) = w_base(t) + Gamma xi + Omega u.
// gamma = |Gamma|, omega = |Omega|, curvature moduli vanish and the time
// rate is |w_base'|.
[[nodiscard]] StateMap make_state_map_linear(PLPath w_base, Mat Gamma, Mat Omega);

// Bounded-slope nonlinear feedback g = w_base(t) + beta * tanh(Gamma xi).
[[nodiscard]] StateMap make_state_map_tanh(PLPath w_base, Mat Gamma, double beta);

// Benchmark problems shared by tests, experiments and the acceptance gate.

// Ramp through the unit play window: u(t) = 2t on [0, 1], x0 = 0.
[[nodiscard]] SweepProblem make_play_ramp_problem(std::size_t num_steps);

// Planar ball of radius 1 dragged right at unit speed for T = 2, u = 0.
[[nodiscard]] SweepProblem make_dragging_ball_problem(std::size_t num_steps);

// Star set (R0 = 1, a = 0.2, k = 3) rotating at 0.4 rad/s while the input
// ramps into a lobe at speed 0.8 for T = 1.5.
[[nodiscard]] SweepProblem make_star_drag_problem(std::size_t num_steps);

// Play ramp with affine deficit feedback w = Gamma xi; gamma chosen so the
// certified contraction factor equals `delta`.
[[nodiscard]] ImplicitProblem make_implicit_play_problem(std::size_t num_steps,
                                                         double delta,
                                                         double epsilon = 0.1);

}  // namespace sweep
