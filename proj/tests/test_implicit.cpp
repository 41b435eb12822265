#include <cmath>

#include "doctest.h"
#include "sweep/errors.hpp"
#include "sweep/families.hpp"
#include "sweep/sweep_implicit.hpp"

using namespace sweep;

namespace {

// Scalar play constraint with hand-picked constants so the contraction
// arithmetic can be checked against pencil and paper.
ImplicitProblem synthetic_problem(double gamma, double epsilon) {
  LevelSetConstraint cons = make_scalar_play(1.0);
  cons.constants = ConstantsBundle::make(1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0);
  const TimeGrid grid = TimeGrid::uniform(1.0, 10);
  PLPath u = PLPath::sample(grid, 1, [](double t) {
    Vec v(1);
    v(0) = 0.5 * t;
    return v;
  });
  Mat Gamma(1, 1), Omega(1, 1);
  Gamma << gamma;
  Omega << 0.0;
  StateMap map =
      make_state_map_linear(PLPath::constant(grid, Vec::Zero(1)), Gamma, Omega);
  return ImplicitProblem(std::move(cons), std::move(u), Vec::Zero(1), std::move(map),
                         epsilon);
}

}  // namespace

TEST_CASE("contraction audit matches hand arithmetic") {
  const ImplicitProblem prob = synthetic_problem(0.4, 0.05);
  const ContractionInfo info = check_contraction(prob);
  // delta = K1 * gamma / c = 2 * 0.4 / 1
  CHECK(info.delta == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(info.delta_star == doctest::Approx((0.8 + 0.05) / (1.0 - 0.05)).epsilon(1e-15));
  // m1 = (K0 + omega K1) / c with omega = 0
  CHECK(info.m1 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(info.m0 > 0.0);
}

TEST_CASE("audit rejects gains and weights outside the contraction region") {
  // K1 * gamma / c = 1.2 >= 1
  CHECK_THROWS_AS((void)check_contraction(synthetic_problem(0.6, 0.05)),
                  NotAContraction);
  // delta = 0.8 leaves room only for epsilon < 0.1
  CHECK_THROWS_AS((void)check_contraction(synthetic_problem(0.4, 0.1)),
                  NotAContraction);
  CHECK_NOTHROW((void)check_contraction(synthetic_problem(0.4, 0.0999)));
}

TEST_CASE("weight profile starts at one and decays monotonically") {
  const ImplicitProblem prob = make_implicit_play_problem(50, 0.5);
  const ContractionInfo info = check_contraction(prob);
  const WeightProfile weights = weight_profile(prob, info);
  CHECK(weights.weight(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  double prev = weights.weight(0.0);
  for (int i = 1; i <= 20; ++i) {
    const double w = weights.weight(i / 20.0);
    CHECK(w <= prev + 1e-15);
    CHECK(w > 0.0);
    prev = w;
  }
  // the input actually moves, so the accumulator must grow
  CHECK(weights.weight(1.0) < 1.0);
}

TEST_CASE("envelope bound dominates the observed deficit slopes") {
  const ImplicitProblem prob = make_implicit_play_problem(100, 0.5);
  const PicardResult result = solve_picard(prob);
  for (const IterationEntry& entry : result.report.entries)
    CHECK(entry.envelope_margin > 0.0);
  const ContractionInfo info = result.report.info;
  const PLPath& xi = result.trajectory.xi;
  for (std::size_t k = 0; k + 1 < xi.grid().num_nodes(); ++k)
    CHECK(envelope_bound(prob, info, k) >= xi.derivative(k).norm());
}

TEST_CASE("fixed point iteration contracts at the certified rate") {
  const ImplicitProblem prob = make_implicit_play_problem(200, 0.5);
  const PicardOptions opts;
  const PicardResult result = solve_picard(prob, opts);
  const IterationReport& report = result.report;

  CHECK(report.info.delta == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.info.delta_star == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  CHECK(report.converged);
  CHECK(report.iterations >= 2);
  CHECK(report.iterations <= report.budget);
  CHECK_FALSE(report.ratio_flagged);
  CHECK(report.worst_ratio > 0.0);
  CHECK(report.worst_ratio <= report.info.delta_star + opts.ratio_tol);
  CHECK(report.final_residual <= 2.0 * opts.tol);

  // the returned parameter path is the feedback evaluated on the returned
  // deficit: w = Gamma xi nodewise
  const double gamma = prob.map.gamma;
  const PLPath& w = result.w;
  for (std::size_t k = 0; k < w.grid().num_nodes(); ++k) {
    const double t = w.grid().node(k);
    CHECK(w.node_value(k)(0) ==
          doctest::Approx(gamma * result.trajectory.xi.value(t)(0)).epsilon(1e-12));
  }
}

TEST_CASE("warm starting from the fixed point converges immediately") {
  const ImplicitProblem prob = make_implicit_play_problem(100, 0.5);
  const PicardResult cold = solve_picard(prob);
  CHECK(cold.report.iterations > 3);

  const PLPath warm = cold.trajectory.xi;
  const PicardResult hot = solve_picard(prob, {}, &warm);
  CHECK(hot.report.converged);
  CHECK(hot.report.iterations == 1);
  CHECK(hot.report.budget == 2);
}

TEST_CASE("invalid initial guesses are rejected up front") {
  const ImplicitProblem prob = make_implicit_play_problem(50, 0.5);
  const TimeGrid& grid = prob.u.grid();

  SUBCASE("wrong dimension") {
    const PLPath bad = PLPath::constant(grid, Vec::Zero(2));
    CHECK_THROWS_AS((void)solve_picard(prob, {}, &bad), ConfigError);
  }
  SUBCASE("wrong starting value") {
    Vec v(1);
    v(0) = 5.0;
    const PLPath bad = PLPath::constant(grid, v);
    CHECK_THROWS_AS((void)solve_picard(prob, {}, &bad), ConfigError);
  }
  SUBCASE("slope outside the admissible envelope") {
    const PLPath bad = PLPath::sample(grid, 1, [](double t) {
      Vec v(1);
      v(0) = 100.0 * t;
      return v;
    });
    CHECK_THROWS_AS((void)solve_picard(prob, {}, &bad), ConfigError);
  }
}

TEST_CASE("iteration cap failure reports the attempt count") {
  const ImplicitProblem prob = make_implicit_play_problem(100, 0.5);
  PicardOptions opts;
  opts.max_iter = 2;
  CHECK_THROWS_AS((void)solve_picard(prob, opts), MaxIterExceeded);
}
