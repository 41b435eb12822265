#include "sweep/sweep_implicit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sweep/errors.hpp"

namespace sweep {

namespace {

PLPath diff_path(PLPath a, PLPath b) {
  refine_to_common_grid(a, b);
  std::vector<Vec> vals;
  vals.reserve(a.grid().num_nodes());
  for (std::size_t k = 0; k < a.grid().num_nodes(); ++k)
    vals.push_back(a.node_value(k) - b.node_value(k));
  return PLPath(a.grid(), std::move(vals));
}

PLPath build_w_path(const ImplicitProblem& prob, const PLPath& xi) {
  const TimeGrid& grid = prob.u.grid();
  std::vector<Vec> vals;
  vals.reserve(grid.num_nodes());
  for (std::size_t k = 0; k < grid.num_nodes(); ++k)
    vals.push_back(
        prob.map.value(grid.node(k), prob.u.node_value(k), xi.value(grid.node(k))));
  return PLPath(grid, std::move(vals));
}

double envelope_margin(const ImplicitProblem& prob, const ContractionInfo& info,
                       const PLPath& xi) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < xi.grid().num_nodes(); ++k)
    worst = std::min(worst, envelope_bound(prob, info, k) - xi.derivative(k).norm());
  return worst;
}

double mid_value(const PLPath& p, double t0, double t1) {
  return p.value(0.5 * (t0 + t1))(0);
}

}  // namespace

ImplicitProblem::ImplicitProblem(LevelSetConstraint cons, PLPath u_in, Vec x0_in,
                                 StateMap map_in, double epsilon_in)
    : constraint(std::move(cons)), u(std::move(u_in)), x0(std::move(x0_in)),
      map(std::move(map_in)), epsilon(epsilon_in) {
  if (u.dim() != constraint.state_dim)
    throw ConfigError("input path dimension does not match the constraint state");
  if (x0.size() != constraint.state_dim)
    throw ConfigError("initial state dimension does not match the constraint");
  if (!map.value) throw ConfigError("state map has no value function");
  if (map.rate_a.dim() != 1 || map.rate_b.dim() != 1)
    throw ConfigError("state map rate bounds must be scalar paths");
  if (!(epsilon > 0.0)) throw ConfigError("weight steepness must be positive");
}

ImplicitProblem ImplicitProblem::refined(std::size_t factor) const {
  ImplicitProblem out = *this;
  out.u = u.refined(factor);
  return out;
}

ContractionInfo check_contraction(const ImplicitProblem& prob) {
  const ConstantsBundle& cb = prob.constraint.constants;
  if (!(cb.c > 0.0))
    throw SolverError("contraction audit needs certified constants on the constraint");
  ContractionInfo info;
  info.delta = cb.K1 * prob.map.gamma / cb.c;
  if (info.delta >= 1.0)
    throw NotAContraction("feedback gain too large: K1 * gamma / c = " +
                          std::to_string(info.delta) + " >= 1");
  if (prob.epsilon >= 0.5 * (1.0 - info.delta))
    throw NotAContraction("weight steepness too large for the contraction margin: "
                          "epsilon must stay below (1 - delta) / 2");
  info.delta_star = (info.delta + prob.epsilon) / (1.0 - prob.epsilon);
  info.m1 = (cb.K0 + prob.map.omega * cb.K1) / cb.c;

  // conservative state-sensitivity coefficient of the weight rate, built
  // from the tube moduli and the feedback sensitivities
  const double k1c = cb.K1 / cb.c;
  const double one_m = 1.0 / (1.0 - info.delta);
  const double p = (1.0 + prob.map.omega * k1c) * one_m;
  const double q = k1c * one_m;
  const double curv = (cb.C1 + cb.C0 * k1c) / cb.c;
  const double gmax = std::max(prob.map.gamma, 1.0);
  const double coef_b = k1c;
  const double coef_a = k1c * prob.map.c_xi * q + gmax * curv * one_m;
  const double coef_u =
      k1c * (prob.map.c_u + prob.map.c_xi * p) +
      gmax * (2.0 * cb.C0 / cb.c + curv * (prob.map.omega + prob.map.gamma * p));
  info.m0 = std::max({coef_a, coef_b, coef_u});
  return info;
}

double envelope_bound(const ImplicitProblem& prob, const ContractionInfo& info,
                      std::size_t k) {
  const ConstantsBundle& cb = prob.constraint.constants;
  const TimeGrid& grid = prob.u.grid();
  const double a = mid_value(prob.map.rate_a, grid.node(k), grid.node(k + 1));
  return ((1.0 + prob.map.omega * cb.K1 / cb.c) * prob.u.derivative(k).norm() +
          cb.K1 / cb.c * a) /
         (1.0 - info.delta);
}

WeightProfile weight_profile(const ImplicitProblem& prob, const ContractionInfo& info) {
  TimeGrid grid = TimeGrid::merge(prob.u.grid(),
                                  TimeGrid::merge(prob.map.rate_a.grid(),
                                                  prob.map.rate_b.grid()));
  const PLPath u = prob.u.on_grid(grid);
  std::vector<Vec> acc(grid.num_nodes(), Vec::Zero(1));
  for (std::size_t k = 0; k + 1 < grid.num_nodes(); ++k) {
    const double t0 = grid.node(k), t1 = grid.node(k + 1);
    const double rate = info.m0 * (mid_value(prob.map.rate_a, t0, t1) +
                                   mid_value(prob.map.rate_b, t0, t1) +
                                   u.derivative(k).norm());
    acc[k + 1] = acc[k];
    acc[k + 1](0) += rate * (t1 - t0);
  }
  return WeightProfile(PLPath(std::move(grid), std::move(acc)), prob.epsilon);
}

PicardResult solve_picard(const ImplicitProblem& prob, const PicardOptions& opts,
                          const PLPath* initial_xi) {
  const ContractionInfo info = check_contraction(prob);
  const WeightProfile weights = weight_profile(prob, info);
  const TimeGrid& grid = prob.u.grid();

  PLPath xi = PLPath::constant(grid, Vec(prob.u.node_value(0) - prob.x0));
  if (initial_xi) {
    if (initial_xi->dim() != prob.u.dim())
      throw ConfigError("initial deficit path has the wrong dimension");
    PLPath cand = initial_xi->grid() == grid ? *initial_xi : initial_xi->on_grid(grid);
    const double scale = std::max(1.0, prob.u.node_value(0).norm() + prob.x0.norm());
    if ((cand.node_value(0) - (prob.u.node_value(0) - prob.x0)).norm() > 1e-9 * scale)
      throw ConfigError("initial deficit path must start at u(0) - x0");
    const double margin = envelope_margin(prob, info, cand);
    if (margin < -opts.envelope_tol_scale * std::max(1.0, w11_seminorm(cand)))
      throw ConfigError("initial deficit path exceeds the admissible slope envelope");
    xi = std::move(cand);
  }

  IterationReport report;
  report.info = info;
  report.budget = opts.max_iter;

  PLPath w = build_w_path(prob, xi);
  Trajectory traj;
  double prev_weighted = 0.0;

  for (int it = 1; it <= opts.max_iter; ++it) {
    SweepProblem inner(prob.constraint, prob.u, w, prob.x0);
    traj = solve(inner, opts.inner);
    const PLPath& xi_new = traj.xi;

    IterationEntry entry;
    entry.plain_dist = w11_distance(xi_new, xi);
    entry.weighted_dist = weighted_w11_seminorm(diff_path(xi_new, xi), weights);
    entry.envelope_margin = envelope_margin(prob, info, xi_new);
    if (it == 1) {
      report.budget =
          entry.plain_dist <= opts.tol
              ? 2
              : static_cast<int>(std::ceil(std::log(opts.tol / entry.plain_dist) /
                                           std::log(info.delta_star))) +
                    2;
    } else if (prev_weighted > 0.0) {
      entry.ratio = entry.weighted_dist / prev_weighted;
      report.worst_ratio = std::max(report.worst_ratio, entry.ratio);
      if (entry.ratio > info.delta_star + opts.ratio_tol) report.ratio_flagged = true;
    }
    prev_weighted = entry.weighted_dist;
    report.entries.push_back(entry);
    report.iterations = it;

    xi = xi_new;
    w = build_w_path(prob, xi);
    if (entry.plain_dist <= opts.tol) {
      report.converged = true;
      break;
    }
  }

  if (!report.converged)
    throw MaxIterExceeded("fixed point iteration missed its tolerance after " +
                          std::to_string(report.iterations) + " sweeps");

  // one extra replay certifies the reported path is a fixed point
  SweepProblem replay(prob.constraint, prob.u, w, prob.x0);
  const Trajectory check = solve(replay, opts.inner);
  report.final_residual = w11_distance(check.xi, xi);

  PicardResult out;
  out.trajectory = std::move(traj);
  out.w = std::move(w);
  out.report = std::move(report);
  return out;
}

}  // namespace sweep
