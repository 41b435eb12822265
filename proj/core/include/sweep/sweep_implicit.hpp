#pragma once

#include <cstdint>
#include <functional>

#include "sweep/sweep_explicit.hpp"

namespace sweep {

using Mat = Eigen::MatrixXd;

// Parameter feedback w(t) = g(t, u(t), xi(t)) with certified sensitivity
// bounds: |d_xi g| <= gamma, |d_u g| <= omega, |d_t g| <= rate_a(t), and
// joint Lipschitz moduli c_xi, c_u, rate_b(t) for the partial derivatives.
struct StateMap {
  std::function<Vec(double t, const Vec& u, const Vec& xi)> value;
  std::function<Mat(double t, const Vec& u, const Vec& xi)> d_u;
  std::function<Mat(double t, const Vec& u, const Vec& xi)> d_xi;
  std::function<Vec(double t, const Vec& u, const Vec& xi)> d_t;
  double gamma = 0.0;
  double omega = 0.0;
  double c_xi = 0.0;
  double c_u = 0.0;
  PLPath rate_a;  // scalar bound on |d_t g|
  PLPath rate_b;  // scalar Lipschitz rate of d_t g
  std::string name;
};

struct ImplicitProblem {
  ImplicitProblem(LevelSetConstraint cons, PLPath u_in, Vec x0_in, StateMap map_in,
                  double epsilon_in = 0.1);

  [[nodiscard]] ImplicitProblem refined(std::size_t factor) const;

  LevelSetConstraint constraint;
  PLPath u;
  Vec x0;
  StateMap map;
  double epsilon;  // weight steepness used by the contraction audit
};

struct ContractionInfo {
  double delta = 0.0;       // K1 * gamma / c
  double delta_star = 0.0;  // (delta + epsilon) / (1 - epsilon)
  double m0 = 0.0;          // state-sensitivity coefficient of the weight rate
  double m1 = 0.0;          // input-sensitivity coefficient (K0 + omega K1) / c
};

// Validates delta < 1 and epsilon < 1 - delta; throws NotAContraction.
[[nodiscard]] ContractionInfo check_contraction(const ImplicitProblem& prob);

// A-priori slope bound for admissible deficit paths at step k:
//   (1/(1-delta)) ((1 + omega K1/c) |u'| + (K1/c) a(t)).
[[nodiscard]] double envelope_bound(const ImplicitProblem& prob,
                                    const ContractionInfo& info, std::size_t k);

// Weight accumulator M with rate m0 (a + b + |u'|), midpoint-sampled per
// step; the profile weight is exp(-M/epsilon).
[[nodiscard]] WeightProfile weight_profile(const ImplicitProblem& prob,
                                           const ContractionInfo& info);

struct IterationEntry {
  double weighted_dist = 0.0;  // weighted gap to the previous iterate
  double plain_dist = 0.0;     // unweighted W11 gap
  double ratio = 0.0;          // weighted gap / previous weighted gap (0 for first)
  double envelope_margin = 0.0;  // min over steps of bound - |xi'|
};

struct IterationReport {
  std::vector<IterationEntry> entries;
  ContractionInfo info;
  bool converged = false;
  int iterations = 0;
  int budget = 0;              // geometric budget from the first gap at rate delta*
  double final_residual = 0.0; // plain W11 gap of one extra replay
  bool ratio_flagged = false;  // some observed ratio exceeded delta* + ratio_tol
  double worst_ratio = 0.0;
};

struct PicardOptions {
  PicardOptions() { inner.record_compensator = false; }

  double tol = 1e-8;  // plain W11 stopping gap
  int max_iter = 100;
  double ratio_tol = 0.05;
  double envelope_tol_scale = 1e-9;
  SolveOptions inner;  // inner explicit solves (compensator off by default here)
};

struct PicardResult {
  Trajectory trajectory;
  PLPath w;  // converged parameter path g(t, u, xi)
  IterationReport report;
};

// Picard iteration on the deficit path: freeze xi, evaluate w = g(t,u,xi),
// solve the explicit problem, repeat.  Starts from the constant deficit
// u(0) - x0 unless an initial path is supplied.
[[nodiscard]] PicardResult solve_picard(const ImplicitProblem& prob,
                                        const PicardOptions& opts = {},
                                        const PLPath* initial_xi = nullptr);

}  // namespace sweep
