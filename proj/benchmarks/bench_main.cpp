// Micro-benchmarks for the hot paths: set projection, the two time-stepping
// schemes, the constant estimators and the exact scalar oracle.  Fixtures
// (including star certification) are built once outside the timed loops.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sweep/certify.hpp"
#include "sweep/families.hpp"
#include "sweep/sweep_explicit.hpp"

using namespace sweep;

namespace {

const LevelSetConstraint& certified_ball() {
  static const LevelSetConstraint cons = [] {
    CertifyOptions opts;
    opts.w_lo = {-0.5, -0.5};
    opts.w_hi = {0.5, 0.5};
    return with_certified_constants(make_moving_ball(2, 1.0), opts);
  }();
  return cons;
}

const LevelSetConstraint& certified_star() {
  static const LevelSetConstraint cons = [] {
    CertifyOptions opts;
    opts.n_boundary = 128;
    opts.n_pairs = 1024;
    opts.n_box = 512;
    opts.n_params = 2;
    opts.w_samples = {Vec::Zero(3)};
    return with_certified_constants(make_star_set(1.0, 0.2, 3), opts);
  }();
  return cons;
}

// Exterior queries inside the uniqueness tube, fixed across iterations.
std::vector<Vec> tube_queries(const LevelSetConstraint& cons, int count) {
  std::vector<Vec> out;
  out.reserve(count);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> frac(0.05, 0.5);
  const Vec w0 = Vec::Zero(cons.param_dim);
  for (int i = 0; i < count; ++i) {
    Vec dir(2);
    const double phi = angle(rng);
    dir << std::cos(phi), std::sin(phi);
    const Vec b = boundary_point_on_ray(dir, w0, cons);
    out.push_back(b + frac(rng) * cons.constants.r * cons.grad_x(b, w0).normalized());
  }
  return out;
}

void BM_ProjectBall(benchmark::State& state) {
  const LevelSetConstraint& cons = certified_ball();
  const std::vector<Vec> queries = tube_queries(cons, 64);
  const Vec w0 = Vec::Zero(2);
  std::size_t i = 0;
  for (auto _ : state) {
    const ProjectionResult res = project_to_set(queries[i++ % queries.size()], w0, cons);
    benchmark::DoNotOptimize(res.distance);
  }
}
BENCHMARK(BM_ProjectBall);

void BM_ProjectStar(benchmark::State& state) {
  const LevelSetConstraint& cons = certified_star();
  const std::vector<Vec> queries = tube_queries(cons, 64);
  const Vec w0 = Vec::Zero(3);
  std::size_t i = 0;
  for (auto _ : state) {
    const ProjectionResult res = project_to_set(queries[i++ % queries.size()], w0, cons);
    benchmark::DoNotOptimize(res.distance);
  }
}
BENCHMARK(BM_ProjectStar);

void BM_SolvePlayCatchingUp(benchmark::State& state) {
  const SweepProblem prob = make_play_ramp_problem(state.range(0));
  for (auto _ : state) {
    const Trajectory traj = solve_catching_up(prob, {});
    benchmark::DoNotOptimize(traj.xi.node_value(0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SolvePlayCatchingUp)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_SolveBallBoundaryOde(benchmark::State& state) {
  const SweepProblem prob = make_dragging_ball_problem(state.range(0));
  SolveOptions opts;
  opts.scheme = Scheme::boundary_ode;
  for (auto _ : state) {
    const Trajectory traj = solve_boundary_ode(prob, opts);
    benchmark::DoNotOptimize(traj.xi.node_value(0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SolveBallBoundaryOde)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_SolveStarCatchingUp(benchmark::State& state) {
  static const SweepProblem base = make_star_drag_problem(100);
  const SweepProblem prob =
      state.range(0) == 100 ? base : base.refined(state.range(0) / 100);
  for (auto _ : state) {
    const Trajectory traj = solve_catching_up(prob, {});
    benchmark::DoNotOptimize(traj.xi.node_value(0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SolveStarCatchingUp)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_GradientFloorStar(benchmark::State& state) {
  const LevelSetConstraint cons = make_star_set(1.0, 0.2, 3);
  CertifyOptions opts;
  opts.n_boundary = static_cast<int>(state.range(0));
  opts.w_samples = {Vec::Zero(3)};
  for (auto _ : state) {
    const double c = estimate_gradient_floor(cons, opts);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_GradientFloorStar)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);

void BM_HypomonotonicityStar(benchmark::State& state) {
  const LevelSetConstraint cons = make_star_set(1.0, 0.2, 3);
  CertifyOptions opts;
  opts.n_pairs = static_cast<int>(state.range(0));
  opts.w_samples = {Vec::Zero(3)};
  for (auto _ : state) {
    const double lambda = estimate_hypomonotonicity(cons, opts);
    benchmark::DoNotOptimize(lambda);
  }
}
BENCHMARK(BM_HypomonotonicityStar)->Arg(1024)->Arg(4096)->Unit(benchmark::kMicrosecond);

void BM_PlayOracle(benchmark::State& state) {
  const SweepProblem prob = make_play_ramp_problem(state.range(0));
  for (auto _ : state) {
    const PLPath xi = play_oracle(prob.u, prob.w, 1.0, 0.0);
    benchmark::DoNotOptimize(xi.node_value(0));
  }
}
BENCHMARK(BM_PlayOracle)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_HausdorffBall(benchmark::State& state) {
  const LevelSetConstraint& cons = certified_ball();
  Vec w2(2);
  w2 << 0.3, 0.0;
  for (auto _ : state) {
    const HausdorffEstimate est =
        hausdorff_estimate(Vec::Zero(2), w2, cons, 512, 5, 0.3);
    benchmark::DoNotOptimize(est.value);
  }
}
BENCHMARK(BM_HausdorffBall)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
