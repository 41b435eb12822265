#include "sweep/sweep_explicit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include "sweep/errors.hpp"
#include "sweep/rng.hpp"

namespace sweep {

namespace {

constexpr std::uint64_t kViTag = 0x51;
constexpr std::uint64_t kGateTag = 0x52;

// Keeps the node identity x + xi == u exact in floating point: nudges the
// stored state by at most one ulp per component.
void exact_split(const Vec& u, Vec& x, Vec& xi) {
  xi = u - x;
  for (int i = 0; i < u.size(); ++i) {
    if (x(i) + xi(i) == u(i)) continue;
    x(i) = u(i) - xi(i);
    xi(i) = u(i) - x(i);
    if (x(i) + xi(i) == u(i)) continue;
    const double up = std::nextafter(xi(i), std::numeric_limits<double>::infinity());
    const double dn = std::nextafter(xi(i), -std::numeric_limits<double>::infinity());
    if (x(i) + up == u(i))
      xi(i) = up;
    else if (x(i) + dn == u(i))
      xi(i) = dn;
  }
}

void require_constants(const SweepProblem& prob) {
  if (!(prob.constraint.constants.c > 0.0) || !(prob.constraint.constants.r > 0.0))
    throw SolverError("solver needs certified constants (c, r) on the constraint");
}

// Per-step admissibility: the combined motion of input and set must stay
// well inside the uniqueness tube, otherwise projections lose meaning.
void check_step_gate(const SweepProblem& prob, const SolveOptions& opts) {
  const double rate = gate_rate(prob, opts.gate_use_sampled_rate, opts.seed);
  const double limit = opts.gate_fraction * prob.constraint.constants.r;
  double worst = 0.0;
  std::size_t worst_step = 0;
  const TimeGrid& grid = prob.u.grid();
  for (std::size_t k = 0; k + 1 < grid.num_nodes(); ++k) {
    const double dt = grid.dt(k);
    const double motion =
        prob.u.derivative(k).norm() * dt + rate * prob.w.derivative(k).norm() * dt;
    if (motion > worst) {
      worst = motion;
      worst_step = k;
    }
  }
  if (worst > limit) {
    const int factor = static_cast<int>(std::ceil(worst / limit));
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "step gate violated at step %zu: per-step motion %.3g exceeds "
                  "%.3g (fraction %.2g of tube radius %.3g); refine the grid by "
                  "about %dx",
                  worst_step, worst, limit, opts.gate_fraction,
                  prob.constraint.constants.r, factor);
    throw SweepGateViolated(buf, factor);
  }
}

double trajectory_rate_scale(const SweepProblem& prob) {
  const ConstantsBundle& cb = prob.constraint.constants;
  const double k1c = cb.c > 0.0 ? cb.K1 / cb.c : 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k + 1 < prob.u.grid().num_nodes(); ++k)
    scale = std::max(scale,
                     prob.u.derivative(k).norm() + k1c * prob.w.derivative(k).norm());
  return scale;
}

struct StepDiag {
  const SweepProblem& prob;
  const SolveOptions& opts;
  std::mt19937_64 vi_rng;

  StepDiag(const SweepProblem& p, const SolveOptions& o)
      : prob(p), opts(o), vi_rng(make_rng(o.seed, kViTag)) {}

  // Fills the per-step record from the states at both ends of step k.
  StepRecord make(std::size_t k, const Vec& x_new, const Vec& xi_old, const Vec& xi_new) {
    const TimeGrid& grid = prob.u.grid();
    const double dt = grid.dt(k);
    const double t_new = grid.node(k + 1);
    const Vec w_new = prob.w.value(t_new);
    StepRecord rec;
    rec.g_value = prob.constraint.value(x_new, w_new);
    rec.active = rec.g_value >= 1.0 - opts.activation_tol;
    const Vec xi_dot = (xi_new - xi_old) / dt;
    rec.xi_dot_norm = xi_dot.norm();
    const Vec gx = prob.constraint.grad_x(x_new, w_new);
    const Vec gw = prob.constraint.grad_w(x_new, w_new);
    rec.drive_a = xi_dot.dot(gx);
    rec.drive_b = prob.u.derivative(k).dot(gx) + prob.w.derivative(k).dot(gw);
    rec.vi_residual = sample_vi(k, x_new, xi_dot, w_new);
    if (opts.record_compensator)
      rec.compensator = compensator(x_new, w_new, prob.w.derivative(k), prob.constraint,
                                    opts.projection);
    return rec;
  }

  // Worst obtuse-angle margin of the step against sampled set members.
  double sample_vi(std::size_t k, const Vec& x_new, const Vec& xi_dot, const Vec& w_new) {
    (void)k;
    if (opts.vi_samples <= 0) return 0.0;
    const double nd = xi_dot.norm();
    if (nd < 1e-14) return 0.0;
    const ConstantsBundle& cb = prob.constraint.constants;
    const Vec a = prob.constraint.interior_point(w_new);
    const double R = prob.constraint.bounding_radius(w_new);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = std::numeric_limits<double>::infinity();
    for (int s = 0; s < opts.vi_samples; ++s) {
      Vec z(prob.constraint.state_dim);
      for (int j = 0; j < z.size(); ++j) z(j) = a(j) + 1.1 * R * unif(vi_rng);
      if (prob.constraint.value(z, w_new) > 1.0) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 50; ++it) {
          const double m = 0.5 * (lo + hi);
          if (prob.constraint.value(a + m * (z - a), w_new) <= 1.0)
            lo = m;
          else
            hi = m;
        }
        z = a + 0.999999 * lo * (z - a);
      }
      const double res =
          xi_dot.dot(x_new - z) + nd / (2.0 * cb.r) * (x_new - z).squaredNorm();
      worst = std::min(worst, res);
    }
    return worst;
  }
};

Trajectory assemble(const SweepProblem& prob, Scheme scheme, std::vector<Vec> xs,
                    std::vector<Vec> xis, std::vector<StepRecord> steps) {
  Trajectory traj;
  traj.scheme = scheme;
  traj.x = PLPath(prob.u.grid(), std::move(xs));
  traj.xi = PLPath(prob.u.grid(), std::move(xis));
  traj.steps = std::move(steps);
  traj.rate_scale = trajectory_rate_scale(prob);
  double rbound = 0.0;
  for (std::size_t k = 0; k < prob.u.grid().num_nodes(); ++k)
    rbound = std::max(rbound, prob.constraint.bounding_radius(prob.w.node_value(k)));
  traj.diag_scale = std::max(1.0, traj.rate_scale) * std::max(1.0, 2.0 * rbound);
  return traj;
}

}  // namespace

SweepProblem::SweepProblem(LevelSetConstraint cons, PLPath u_in, PLPath w_in, Vec x0_in)
    : constraint(std::move(cons)), u(std::move(u_in)), w(std::move(w_in)),
      x0(std::move(x0_in)) {
  if (u.dim() != constraint.state_dim)
    throw ConfigError("input path dimension does not match the constraint state");
  if (w.dim() != constraint.param_dim)
    throw ConfigError("parameter path dimension does not match the constraint");
  if (x0.size() != constraint.state_dim)
    throw ConfigError("initial state dimension does not match the constraint");
  refine_to_common_grid(u, w);
  const double g0 = constraint.value(x0, w.node_value(0));
  if (g0 > 1.0 + constraint.level_tol)
    throw ConfigError("initial state lies outside the constraint set");
}

SweepProblem SweepProblem::refined(std::size_t factor) const {
  SweepProblem out = *this;
  out.u = u.refined(factor);
  out.w = w.refined(factor);
  return out;
}

const char* to_string(Scheme s) {
  return s == Scheme::catching_up ? "catching_up" : "boundary_ode";
}

double gate_rate(const SweepProblem& prob, bool use_sampled, std::uint64_t seed) {
  const ConstantsBundle& cb = prob.constraint.constants;
  double K = 0.0;
  for (std::size_t k = 0; k < prob.w.grid().num_nodes(); ++k)
    K = std::max(K, prob.w.node_value(k).norm());
  const double certified = hausdorff_rate_bound(cb, K);
  if (!use_sampled) return certified;

  const TimeGrid& grid = prob.w.grid();
  const std::size_t stride = std::max<std::size_t>(1, (grid.num_nodes() - 1) / 32);
  double rate = 0.0;
  for (std::size_t k = 0; k + 1 < grid.num_nodes(); k += stride) {
    const Vec w1 = prob.w.node_value(k);
    const Vec w2 = prob.w.node_value(k + 1);
    const double dw = (w1 - w2).norm();
    if (dw < 1e-14) continue;
    const HausdorffEstimate est =
        hausdorff_estimate(w1, w2, prob.constraint, 64, mix_seed(seed, kGateTag), K);
    rate = std::max(rate, est.value / dw);
  }
  // sampled excess underestimates, keep a slack factor; fall back to the
  // certified rate when the parameter never moves
  return rate > 0.0 ? 1.25 * rate : certified;
}

Trajectory solve_catching_up(const SweepProblem& prob, const SolveOptions& opts) {
  require_constants(prob);
  check_step_gate(prob, opts);
  const TimeGrid& grid = prob.u.grid();
  const std::size_t n = grid.num_nodes();

  std::vector<Vec> xs(n), xis(n);
  std::vector<StepRecord> steps;
  steps.reserve(n - 1);
  StepDiag diag(prob, opts);

  Vec x = prob.x0;
  Vec xi(x.size());
  exact_split(prob.u.node_value(0), x, xi);
  xs[0] = x;
  xis[0] = xi;

  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vec& u_new = prob.u.node_value(k + 1);
    const Vec w_new = prob.w.node_value(k + 1);
    // carry the deficit, then pull the tentative state back into the set
    Vec y = u_new - xi;
    const ProjectionResult pr = project_to_set(y, w_new, prob.constraint, opts.projection);
    Vec x_new = pr.point;
    Vec xi_new(x.size());
    exact_split(u_new, x_new, xi_new);
    StepRecord rec = diag.make(k, x_new, xi, xi_new);
    rec.g_pre_projection = prob.constraint.value(y, w_new);
    rec.g_post_projection = rec.g_value;
    steps.push_back(std::move(rec));
    x = x_new;
    xi = xi_new;
    xs[k + 1] = x;
    xis[k + 1] = xi;
  }
  return assemble(prob, Scheme::catching_up, std::move(xs), std::move(xis),
                  std::move(steps));
}

Trajectory solve_boundary_ode(const SweepProblem& prob, const SolveOptions& opts) {
  require_constants(prob);
  check_step_gate(prob, opts);
  const TimeGrid& grid = prob.u.grid();
  const std::size_t n = grid.num_nodes();

  std::vector<Vec> xs(n), xis(n);
  std::vector<StepRecord> steps;
  steps.reserve(n - 1);
  StepDiag diag(prob, opts);

  Vec x = prob.x0;
  Vec xi(x.size());
  exact_split(prob.u.node_value(0), x, xi);
  xs[0] = x;
  xis[0] = xi;

  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dt = grid.dt(k);
    const Vec& u_new = prob.u.node_value(k + 1);
    const Vec w_k = prob.w.node_value(k);
    const Vec u_dot = prob.u.derivative(k);
    const Vec w_dot = prob.w.derivative(k);

    // deficit moves only in contact and only when the normal drive pushes
    // outward; then it slides along the outward normal at the matched rate
    Vec xi_dot = Vec::Zero(x.size());
    const double g_here = prob.constraint.value(x, w_k);
    if (g_here >= 1.0 - opts.activation_tol) {
      const Vec gx = prob.constraint.grad_x(x, w_k);
      const double gn2 = gx.squaredNorm();
      if (gn2 > 1e-20) {
        const double b = u_dot.dot(gx) + w_dot.dot(prob.constraint.grad_w(x, w_k));
        if (b > 0.0) xi_dot = (b / gn2) * gx;
      }
    }

    Vec xi_new = xi + dt * xi_dot;
    Vec x_new = u_new - xi_new;
    const double g_pre = prob.constraint.value(x_new, prob.w.node_value(k + 1));
    double g_post = g_pre;
    if (g_pre > 1.0 + prob.constraint.level_tol) {
      // first-order drift accumulates outward; pull back onto the set
      const ProjectionResult pr =
          project_to_set(x_new, prob.w.node_value(k + 1), prob.constraint, opts.projection);
      x_new = pr.point;
      g_post = prob.constraint.value(x_new, prob.w.node_value(k + 1));
    }
    exact_split(u_new, x_new, xi_new);
    StepRecord rec = diag.make(k, x_new, xi, xi_new);
    rec.g_pre_projection = g_pre;
    rec.g_post_projection = g_post;
    steps.push_back(std::move(rec));
    x = x_new;
    xi = xi_new;
    xs[k + 1] = x;
    xis[k + 1] = xi;
  }
  return assemble(prob, Scheme::boundary_ode, std::move(xs), std::move(xis),
                  std::move(steps));
}

Trajectory solve(const SweepProblem& prob, const SolveOptions& opts) {
  return opts.scheme == Scheme::catching_up ? solve_catching_up(prob, opts)
                                            : solve_boundary_ode(prob, opts);
}

DriveTerms drive_terms(const SweepProblem& prob, const Trajectory& traj, std::size_t k) {
  const TimeGrid& grid = prob.u.grid();
  const double t_new = grid.node(k + 1);
  const Vec x_new = traj.x.node_value(k + 1);
  const Vec w_new = prob.w.value(t_new);
  const Vec gx = prob.constraint.grad_x(x_new, w_new);
  const Vec gw = prob.constraint.grad_w(x_new, w_new);
  DriveTerms dt;
  dt.a = traj.xi.derivative(k).dot(gx);
  dt.b = prob.u.derivative(k).dot(gx) + prob.w.derivative(k).dot(gw);
  return dt;
}

RateBoundReport rate_bound_check(const SweepProblem& prob, const Trajectory& traj) {
  const ConstantsBundle& cb = prob.constraint.constants;
  if (!(cb.c > 0.0)) throw SolverError("rate bound audit needs certified constants");
  RateBoundReport rep;
  rep.scale = traj.diag_scale;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  const std::size_t m = traj.steps.size();
  for (std::size_t k = 0; k < m; ++k) {
    const double bound =
        prob.u.derivative(k).norm() + cb.K1 / cb.c * prob.w.derivative(k).norm();
    const double margin = bound - traj.steps[k].xi_dot_norm;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_step = k;
    }
  }
  if (m == 0) rep.worst_margin = 0.0;
  rep.pass = rep.worst_margin >= -1e-6 * rep.scale;
  return rep;
}

double vi_residual(const SweepProblem& prob, const Trajectory& traj, std::size_t k,
                   int n_z, std::uint64_t seed) {
  SolveOptions opts;
  opts.vi_samples = n_z;
  opts.seed = seed;
  StepDiag diag(prob, opts);
  const Vec x_new = traj.x.node_value(k + 1);
  const Vec w_new = prob.w.node_value(k + 1);
  const Vec xi_dot = traj.xi.derivative(k);
  return diag.sample_vi(k, x_new, xi_dot, w_new);
}

ViReport vi_check(const SweepProblem& prob, const Trajectory& traj, int n_z,
                  std::uint64_t seed) {
  ViReport rep;
  rep.scale = traj.diag_scale;
  rep.worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.steps.size(); ++k) {
    const double res = vi_residual(prob, traj, k, n_z, mix_seed(seed, k));
    if (res < rep.worst) {
      rep.worst = res;
      rep.worst_step = k;
    }
  }
  if (traj.steps.empty()) rep.worst = 0.0;
  rep.pass = rep.worst >= -1e-6 * rep.scale;
  return rep;
}

Vec compensator(const Vec& x, const Vec& w, const Vec& w_dot,
                const LevelSetConstraint& cons, const ProjectionOptions& opts) {
  const Vec gx = cons.grad_x(x, w);
  const double gn2 = gx.squaredNorm();
  if (gn2 < 1e-20) return Vec::Zero(x.size());
  double dist = 0.0;
  const double g = cons.value(x, w);
  if (g <= 1.0 - 1e-12) {
    dist = distance_to_boundary(x, w, cons, opts);
  } else if (g > 1.0 + 1e-9) {
    // exterior states only appear transiently inside schemes; measure the
    // gap to the level surface the same way
    dist = distance_to_set(x, w, cons, opts);
  }
  const double wg = w_dot.dot(cons.grad_w(x, w));
  return gx * (wg / (dist + gn2));
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const TimeGrid& grid = traj.x.grid();
  const int dx = traj.x.dim();
  out << "t";
  for (int j = 0; j < dx; ++j) out << ",x" << j;
  for (int j = 0; j < dx; ++j) out << ",xi" << j;
  out << ",active,G,B,xidot_norm,vi_residual\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (std::size_t k = 0; k < grid.num_nodes(); ++k) {
    put(grid.node(k));
    for (int j = 0; j < dx; ++j) {
      out << ',';
      put(traj.x.node_value(k)(j));
    }
    for (int j = 0; j < dx; ++j) {
      out << ',';
      put(traj.xi.node_value(k)(j));
    }
    if (k == 0) {
      out << ",0,0,0,0,0\n";
      continue;
    }
    const StepRecord& rec = traj.steps[k - 1];
    out << ',' << (rec.active ? 1 : 0) << ',';
    put(rec.g_value);
    out << ',';
    put(rec.drive_b);
    out << ',';
    put(rec.xi_dot_norm);
    out << ',';
    put(rec.vi_residual);
    out << '\n';
  }
}

}  // namespace sweep
