#include "sweep/families.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "sweep/certify.hpp"
#include "sweep/errors.hpp"

namespace sweep {

namespace {

// Working tube used by the analytic constants: levels up to this stay in
// the identity region of the saturation, so tube constants of the raw and
// saturated functions coincide.
constexpr double kTubeLevel = 1.8;

}  // namespace

double saturate_level(double s) {
  if (s <= 2.0) return s;
  if (s >= 4.0) return 3.0;
  const double q = 0.5 * (s - 2.0);
  return 2.0 + 2.0 * (q - q * q * q + 0.5 * q * q * q * q);
}

double saturate_level_slope(double s) {
  if (s <= 2.0) return 1.0;
  if (s >= 4.0) return 0.0;
  const double q = 0.5 * (s - 2.0);
  return 1.0 - 3.0 * q * q + 2.0 * q * q * q;
}

LevelSetConstraint make_scalar_play(double rho) { return make_moving_ball(1, rho); }

LevelSetConstraint make_moving_ball(int dim, double rho) {
  if (dim < 1) throw ConfigError("ball family needs dim >= 1");
  if (!(rho > 0.0)) throw ConfigError("ball family needs rho > 0");
  LevelSetConstraint cons;
  cons.state_dim = dim;
  cons.param_dim = dim;
  cons.name = dim == 1 ? "scalar_play" : "moving_ball";
  const double inv_r2 = 1.0 / (rho * rho);
  cons.value = [inv_r2](const Vec& x, const Vec& w) {
    return saturate_level((x - w).squaredNorm() * inv_r2);
  };
  cons.grad_x = [inv_r2](const Vec& x, const Vec& w) -> Vec {
    const Vec d = x - w;
    return saturate_level_slope(d.squaredNorm() * inv_r2) * 2.0 * inv_r2 * d;
  };
  cons.grad_w = [inv_r2](const Vec& x, const Vec& w) -> Vec {
    const Vec d = x - w;
    return saturate_level_slope(d.squaredNorm() * inv_r2) * (-2.0 * inv_r2) * d;
  };
  cons.interior_point = [](const Vec& w) { return w; };
  cons.bounding_radius = [rho](const Vec&) { return rho; };
  // Exact tube constants of the saturated quadratic: gradient 2|x-w|/rho^2
  // grows to 2 sqrt(tube)/rho on the tube, curvature is constant 2/rho^2,
  // and G - 1 >= dist/rho holds out to twice the radius.
  const double grad_cap = 2.0 * std::sqrt(kTubeLevel) / rho;
  cons.constants = ConstantsBundle::make(
      /*c=*/2.0 / rho, /*lambda=*/1e-6, /*L=*/grad_cap, /*K0=*/grad_cap,
      /*K1=*/grad_cap, /*C0=*/2.0 * inv_r2, /*C1=*/2.0 * inv_r2,
      /*kappa=*/1.0 / rho);
  return cons;
}

LevelSetConstraint make_star_set(double R0, double a, int k) {
  if (!(R0 > 0.0)) throw ConfigError("star family needs R0 > 0");
  if (!(a >= 0.0 && a < 1.0))
    throw ConfigError("star family needs 0 <= a < 1 for a positive radius");
  if (k < 2) throw ConfigError("star family needs k >= 2");

  struct Polar {
    double rad;       // |x - c|
    double R, Rp;     // radius and its angle derivative at the offset angle
    Vec e_rad, e_ang; // local frame, zero when rad degenerates
  };
  auto polar = [R0, a, k](const Vec& x, const Vec& w) {
    Polar p;
    const double dx = x(0) - w(0), dy = x(1) - w(1);
    p.rad = std::hypot(dx, dy);
    const double theta = std::atan2(dy, dx);
    const double psi = theta - w(2);
    p.R = R0 * (1.0 + a * std::cos(k * psi));
    p.Rp = -R0 * a * k * std::sin(k * psi);
    p.e_rad = Vec::Zero(2);
    p.e_ang = Vec::Zero(2);
    if (p.rad > 1e-13) {
      p.e_rad << dx / p.rad, dy / p.rad;
      p.e_ang << -dy / p.rad, dx / p.rad;
    }
    return p;
  };

  LevelSetConstraint cons;
  cons.state_dim = 2;
  cons.param_dim = 3;
  cons.name = "star_set";
  cons.value = [polar](const Vec& x, const Vec& w) {
    const Polar p = polar(x, w);
    return saturate_level(p.rad * p.rad / (p.R * p.R));
  };
  cons.grad_x = [polar](const Vec& x, const Vec& w) -> Vec {
    const Polar p = polar(x, w);
    if (p.rad <= 1e-13) return Vec::Zero(2);
    const double raw = p.rad * p.rad / (p.R * p.R);
    const double slope = saturate_level_slope(raw);
    return slope * (2.0 * p.rad / (p.R * p.R) * p.e_rad -
                    2.0 * p.rad * p.Rp / (p.R * p.R * p.R) * p.e_ang);
  };
  cons.grad_w = [polar](const Vec& x, const Vec& w) -> Vec {
    const Polar p = polar(x, w);
    Vec g = Vec::Zero(3);
    if (p.rad <= 1e-13) return g;
    const double raw = p.rad * p.rad / (p.R * p.R);
    const double slope = saturate_level_slope(raw);
    const Vec gx = slope * (2.0 * p.rad / (p.R * p.R) * p.e_rad -
                            2.0 * p.rad * p.Rp / (p.R * p.R * p.R) * p.e_ang);
    g(0) = -gx(0);
    g(1) = -gx(1);
    g(2) = slope * 2.0 * p.rad * p.rad * p.Rp / (p.R * p.R * p.R);
    return g;
  };
  cons.interior_point = [](const Vec& w) { return Vec(w.head(2)); };
  const double r_max = R0 * (1.0 + a);
  cons.bounding_radius = [r_max](const Vec&) { return r_max; };
  // The monotonicity defect of the lobes has no convenient closed form, so
  // the uniqueness tube comes from the certifier; only the declared
  // coercivity rate is analytic here.
  cons.constants = ConstantsBundle{};
  cons.constants.coercivity_kappa = 1.0 / r_max;
  return cons;
}

PLPath play_oracle(const PLPath& u, const PLPath& w_center, double rho, double x0) {
  if (u.dim() != 1 || w_center.dim() != 1)
    throw ConfigError("play oracle is scalar");
  if (!(rho > 0.0)) throw ConfigError("play oracle needs rho > 0");
  PLPath uu = u, ww = w_center;
  refine_to_common_grid(uu, ww);
  const TimeGrid& grid = uu.grid();

  std::vector<double> nodes = {grid.node(0)};
  std::vector<double> xs = {x0};
  {
    const double lo = ww.node_value(0)(0) - rho, hi = ww.node_value(0)(0) + rho;
    xs[0] = std::min(hi, std::max(lo, x0));
  }

  for (std::size_t kstep = 0; kstep + 1 < grid.num_nodes(); ++kstep) {
    double t = grid.node(kstep);
    const double t_end = grid.node(kstep + 1);
    const double su = uu.derivative(kstep)(0);
    const double sw = ww.derivative(kstep)(0);
    double x = xs.back();
    int guard = 0;
    while (t < t_end && ++guard < 8) {
      const double w_t = ww.value(t)(0);
      const double hi = w_t + rho, lo = w_t - rho;
      const double tol = 1e-13 * std::max(1.0, std::abs(hi));
      double t_next = t_end;
      double x_next;
      if (x >= hi - tol && su > sw) {
        // pressed against the upper edge, rides it for the whole piece
        x_next = ww.value(t_end)(0) + rho;
      } else if (x <= lo + tol && su < sw) {
        x_next = ww.value(t_end)(0) - rho;
      } else {
        // free motion; insert the first crossing with either edge
        const double rel = su - sw;
        x_next = x + su * (t_end - t);
        if (rel > 0.0) {
          const double t_hit = t + (hi - x) / rel;
          if (t_hit > t + tol && t_hit < t_end - tol) {
            t_next = t_hit;
            x_next = ww.value(t_hit)(0) + rho;
          } else if (x_next > ww.value(t_end)(0) + rho) {
            x_next = ww.value(t_end)(0) + rho;
          }
        } else if (rel < 0.0) {
          const double t_hit = t + (lo - x) / rel;
          if (t_hit > t + tol && t_hit < t_end - tol) {
            t_next = t_hit;
            x_next = ww.value(t_hit)(0) - rho;
          } else if (x_next < ww.value(t_end)(0) - rho) {
            x_next = ww.value(t_end)(0) - rho;
          }
        }
      }
      nodes.push_back(t_next);
      xs.push_back(x_next);
      t = t_next;
      x = x_next;
    }
  }

  std::vector<Vec> xi_vals;
  xi_vals.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    Vec v(1);
    v(0) = uu.value(nodes[i])(0) - xs[i];
    xi_vals.push_back(v);
  }
  return PLPath(TimeGrid(std::move(nodes)), std::move(xi_vals));
}

StateMap make_state_map_linear(PLPath w_base, Mat Gamma, Mat Omega) {
  StateMap map;
  map.name = "linear";
  const int m = static_cast<int>(Gamma.rows());
  if (Omega.rows() != m) throw ConfigError("state map: Gamma/Omega row mismatch");
  if (w_base.dim() != m) throw ConfigError("state map: base path dimension mismatch");
  map.value = [w_base, Gamma, Omega](double t, const Vec& u, const Vec& xi) -> Vec {
    return w_base.value(t) + Gamma * xi + Omega * u;
  };
  map.d_u = [Omega](double, const Vec&, const Vec&) { return Omega; };
  map.d_xi = [Gamma](double, const Vec&, const Vec&) { return Gamma; };
  map.d_t = [w_base](double t, const Vec&, const Vec&) -> Vec {
    return w_base.derivative(w_base.grid().locate(t));
  };
  map.gamma = Gamma.operatorNorm();
  map.omega = Omega.operatorNorm();
  map.c_xi = 0.0;
  map.c_u = 0.0;

  const TimeGrid& g = w_base.grid();
  std::vector<Vec> a_vals(g.num_nodes());
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    double bound = 0.0;
    if (k > 0) bound = std::max(bound, w_base.derivative(k - 1).norm());
    if (k + 1 < g.num_nodes()) bound = std::max(bound, w_base.derivative(k).norm());
    Vec v(1);
    v(0) = bound;
    a_vals[k] = v;
  }
  map.rate_a = PLPath(g, std::move(a_vals));
  map.rate_b = PLPath::constant(g, Vec::Zero(1));
  map.name = "linear";
  return map;
}

StateMap make_state_map_tanh(PLPath w_base, Mat Gamma, double beta) {
  StateMap map = make_state_map_linear(w_base, Gamma, Mat::Zero(Gamma.rows(), Gamma.cols()));
  map.name = "tanh";
  const int m = static_cast<int>(Gamma.rows());
  map.value = [w_base, Gamma, beta](double t, const Vec& u, const Vec& xi) -> Vec {
    (void)u;
    Vec z = Gamma * xi;
    for (int i = 0; i < z.size(); ++i) z(i) = std::tanh(z(i));
    return w_base.value(t) + beta * z;
  };
  map.d_xi = [Gamma, beta, m](double, const Vec&, const Vec& xi) -> Mat {
    const Vec z = Gamma * xi;
    Mat d(m, Gamma.cols());
    for (int i = 0; i < m; ++i) {
      const double c = std::cosh(z(i));
      d.row(i) = (beta / (c * c)) * Gamma.row(i);
    }
    return d;
  };
  map.gamma = beta * Gamma.operatorNorm();
  map.omega = 0.0;
  // |d/ds sech^2| <= 0.77, so the xi-derivative drifts at most this fast
  map.c_xi = 0.77 * beta * Gamma.operatorNorm() * Gamma.operatorNorm();
  map.c_u = 0.0;
  return map;
}

SweepProblem make_play_ramp_problem(std::size_t num_steps) {
  LevelSetConstraint cons = make_scalar_play(1.0);
  const TimeGrid grid = TimeGrid::uniform(1.0, num_steps);
  PLPath u = PLPath::sample(grid, 1, [](double t) {
    Vec v(1);
    v(0) = 2.0 * t;
    return v;
  });
  PLPath w = PLPath::constant(grid, Vec::Zero(1));
  Vec x0 = Vec::Zero(1);
  return SweepProblem(std::move(cons), std::move(u), std::move(w), std::move(x0));
}

SweepProblem make_dragging_ball_problem(std::size_t num_steps) {
  LevelSetConstraint cons = make_moving_ball(2, 1.0);
  const TimeGrid grid = TimeGrid::uniform(2.0, num_steps);
  PLPath u = PLPath::constant(grid, Vec::Zero(2));
  PLPath w = PLPath::sample(grid, 2, [](double t) {
    Vec v(2);
    v << t, 0.0;
    return v;
  });
  Vec x0 = Vec::Zero(2);
  return SweepProblem(std::move(cons), std::move(u), std::move(w), std::move(x0));
}

SweepProblem make_star_drag_problem(std::size_t num_steps) {
  CertifyOptions copts;
  copts.w_lo = {0.0, 0.0, 0.0};
  copts.w_hi = {0.0, 0.0, 0.65};
  copts.n_params = 6;
  LevelSetConstraint cons = with_certified_constants(make_star_set(1.0, 0.2, 3), copts);
  const TimeGrid grid = TimeGrid::uniform(1.5, num_steps);
  PLPath u = PLPath::sample(grid, 2, [](double t) {
    Vec v(2);
    v << 0.8 * t, 0.0;
    return v;
  });
  PLPath w = PLPath::sample(grid, 3, [](double t) {
    Vec v(3);
    v << 0.0, 0.0, 0.4 * t;
    return v;
  });
  Vec x0 = Vec::Zero(2);
  return SweepProblem(std::move(cons), std::move(u), std::move(w), std::move(x0));
}

ImplicitProblem make_implicit_play_problem(std::size_t num_steps, double delta,
                                           double epsilon) {
  CertifyOptions copts;
  copts.w_lo = {-0.8};
  copts.w_hi = {0.8};
  LevelSetConstraint cons = with_certified_constants(make_scalar_play(1.0), copts);
  const double gamma = delta * cons.constants.c / cons.constants.K1;
  const TimeGrid grid = TimeGrid::uniform(1.0, num_steps);
  PLPath u = PLPath::sample(grid, 1, [](double t) {
    Vec v(1);
    v(0) = 2.0 * t;
    return v;
  });
  Mat Gamma(1, 1), Omega(1, 1);
  Gamma << gamma;
  Omega << 0.0;
  StateMap map = make_state_map_linear(PLPath::constant(grid, Vec::Zero(1)), Gamma, Omega);
  Vec x0 = Vec::Zero(1);
  return ImplicitProblem(std::move(cons), std::move(u), std::move(x0), std::move(map),
                         epsilon);
}

}  // namespace sweep
