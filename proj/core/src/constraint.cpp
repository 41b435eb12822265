#include "sweep/constraint.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "sweep/errors.hpp"
#include "sweep/rng.hpp"

namespace sweep {

namespace {

constexpr std::uint64_t kScanSeedTag = 0xb01dface;


// First level crossing along a ray with a sign-changing bracket.
// `lo` must evaluate below the level, `hi` above.
double bisect_crossing(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 90; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-16 * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

Eigen::MatrixXd fd_hessian(const LevelSetConstraint& cons, const Vec& x, const Vec& w) {
  const int n = cons.state_dim;
  const double h = 1e-6 * std::max(1.0, x.norm());
  Eigen::MatrixXd H(n, n);
  Vec xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    H.col(j) = (cons.grad_x(xp, w) - cons.grad_x(xm, w)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return 0.5 * (H + H.transpose());
}

struct BoundarySolve {
  Vec p;
  double s = 0.0;
  int iters = 0;
  bool converged = false;
};

// Damped Newton on the stationarity system of the nearest-boundary-point
// problem:  p - q - s * grad_x G(p, w) = 0,  G(p, w) = 1.
// s < 0 corresponds to exterior queries, s > 0 to interior ones.
BoundarySolve boundary_newton(const Vec& q, const Vec& w, const LevelSetConstraint& cons,
                              const Vec& p_init, double s_init,
                              const ProjectionOptions& opts) {
  const int n = cons.state_dim;
  Vec p = p_init;
  double s = s_init;
  BoundarySolve out;

  auto residual = [&](const Vec& pp, double ss, Vec& Fx, double& Fg) {
    const Vec g = cons.grad_x(pp, w);
    Fx = pp - q - ss * g;
    Fg = cons.value(pp, w) - 1.0;
  };

  Vec Fx;
  double Fg = 0.0;
  residual(p, s, Fx, Fg);
  double fnorm = std::sqrt(Fx.squaredNorm() + Fg * Fg);

  for (int it = 0; it < opts.max_iter; ++it) {
    if (Fx.norm() <= opts.tol && std::abs(Fg) <= opts.level_tol) {
      out.converged = true;
      break;
    }
    const Vec g = cons.grad_x(p, w);
    const Eigen::MatrixXd H = fd_hessian(cons, p, w);
    Eigen::MatrixXd J(n + 1, n + 1);
    J.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n) - s * H;
    J.topRightCorner(n, 1) = -g;
    J.bottomLeftCorner(1, n) = g.transpose();
    J(n, n) = 0.0;

    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = -Fx;
    rhs(n) = -Fg;
    const Eigen::VectorXd step = J.fullPivLu().solve(rhs);
    if (!step.allFinite()) break;

    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 25; ++bt) {
      const Vec p_new = p + alpha * step.head(n);
      const double s_new = s + alpha * step(n);
      Vec Fx_new;
      double Fg_new = 0.0;
      residual(p_new, s_new, Fx_new, Fg_new);
      const double fn = std::sqrt(Fx_new.squaredNorm() + Fg_new * Fg_new);
      if (fn < (1.0 - 1e-4 * alpha) * fnorm) {
        p = p_new;
        s = s_new;
        Fx = Fx_new;
        Fg = Fg_new;
        fnorm = fn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++out.iters;
    if (!accepted) break;  // stalled; caller falls back
  }
  if (!out.converged) {
    // final state may still satisfy the targets after the last accepted step
    if (Fx.norm() <= opts.tol && std::abs(Fg) <= opts.level_tol) out.converged = true;
  }
  out.p = p;
  out.s = s;
  return out;
}

}  // namespace

ConstantsBundle ConstantsBundle::make(double c, double lambda, double L, double K0,
                                      double K1, double C0, double C1,
                                      std::optional<double> kappa) {
  if (!(c > 0.0)) throw ConfigError("constants: gradient floor c must be positive");
  if (!(lambda > 0.0)) throw ConfigError("constants: lambda must be positive");
  ConstantsBundle cb;
  cb.c = c;
  cb.lambda = lambda;
  cb.r = c / lambda;
  cb.L = L;
  cb.K0 = K0;
  cb.K1 = K1;
  cb.C0 = C0;
  cb.C1 = C1;
  cb.coercivity_kappa = kappa;
  return cb;
}

std::vector<Vec> sphere_directions(int dim, int count, std::uint64_t seed) {
  std::vector<Vec> dirs;
  dirs.reserve(count);
  auto rng = make_rng(seed, kScanSeedTag);
  if (dim == 1) {
    for (int i = 0; i < count; ++i) {
      Vec d(1);
      d(0) = (i % 2 == 0) ? 1.0 : -1.0;
      dirs.push_back(d);
    }
  } else if (dim == 2) {
    std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi / count);
    const double phase = ph(rng);
    for (int i = 0; i < count; ++i) {
      const double a = phase + 2.0 * std::numbers::pi * i / count;
      Vec d(2);
      d << std::cos(a), std::sin(a);
      dirs.push_back(d);
    }
  } else if (dim == 3) {
    // Fibonacci sphere with a seeded azimuth phase
    std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
    const double phase = ph(rng);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = phase + golden * i;
      Vec d(3);
      d << rad * std::cos(a), rad * std::sin(a), z;
      dirs.push_back(d);
    }
  } else {
    std::normal_distribution<double> gauss;
    for (int i = 0; i < count; ++i) {
      Vec d(dim);
      do {
        for (int j = 0; j < dim; ++j) d(j) = gauss(rng);
      } while (d.norm() < 1e-12);
      dirs.push_back(d.normalized());
    }
  }
  return dirs;
}

Vec boundary_point_on_ray(const Vec& dir, const Vec& w, const LevelSetConstraint& cons) {
  const Vec a = cons.interior_point(w);
  if (cons.value(a, w) >= 1.0)
    throw SolverError("constraint anchor is not interior for this parameter");
  const Vec u = dir.normalized();
  const double t_hi = cons.bounding_radius(w) * (1.0 + 1e-9);
  auto f = [&](double t) { return cons.value(a + t * u, w) - 1.0; };
  if (f(t_hi) <= 0.0)
    throw SolverError("bounding radius does not enclose the set");
  double t = bisect_crossing(f, 0.0, t_hi);
  // 1-d Newton polish on the ray keeps |G - 1| at round-off level
  for (int it = 0; it < 4; ++it) {
    const Vec p = a + t * u;
    const double slope = cons.grad_x(p, w).dot(u);
    if (std::abs(slope) < 1e-14) break;
    t -= (cons.value(p, w) - 1.0) / slope;
  }
  return a + t * u;
}

ProjectionResult project_to_set(const Vec& y, const Vec& w,
                                const LevelSetConstraint& cons,
                                const ProjectionOptions& opts) {
  ProjectionResult out;
  const double Gy = cons.value(y, w);
  if (Gy <= 1.0 + opts.level_tol) {
    out.point = y;
    out.interior = true;
    return out;
  }
  if (!(cons.constants.c > 0.0))
    throw SolverError("projection needs certified constants on the constraint");

  const Vec anchor = cons.interior_point(w);
  auto fseg = [&](double t) { return cons.value(anchor + t * (y - anchor), w) - 1.0; };
  const double t_cross = bisect_crossing(fseg, 0.0, 1.0);
  const Vec radial = anchor + t_cross * (y - anchor);

  // Coarse boundary scan: upper bound on the distance and alternative
  // Newton starts for queries near concave parts of the boundary.
  const auto dirs = sphere_directions(cons.state_dim, opts.scan_directions, kScanSeedTag);
  Vec scan_best = radial;
  double scan_dist = (y - radial).norm();
  for (const Vec& d : dirs) {
    const Vec b = boundary_point_on_ray(d, w, cons);
    const double dist = (y - b).norm();
    if (dist < scan_dist) {
      scan_dist = dist;
      scan_best = b;
    }
  }

  const double d_est = std::min(scan_dist, (y - radial).norm());
  const double tube = opts.safety_factor * cons.constants.r;
  if (d_est >= tube)
    throw OutsideProxTube("query at estimated distance " + std::to_string(d_est) +
                          " exceeds admissible tube " + std::to_string(tube));

  std::vector<Vec> inits = {radial, scan_best};
  bool have = false;
  Vec best_p;
  int iters = 0;
  double best_dist = 0.0;
  for (const Vec& init : inits) {
    const double gn = cons.grad_x(init, w).norm();
    const double s0 = -(y - init).norm() / std::max(gn, 1e-12);
    const auto sol = boundary_newton(y, w, cons, init, s0, opts);
    iters += sol.iters;
    if (!sol.converged) continue;
    const double dist = (y - sol.p).norm();
    if (!have || dist < best_dist) {
      have = true;
      best_p = sol.p;
      best_dist = dist;
    }
  }

  if (!have) {
    // Fallback: gradient steps toward the query with radial retraction,
    // then a final Newton polish.
    out.used_fallback = true;
    Vec z = scan_best;
    for (int it = 0; it < 400; ++it) {
      Vec cand = z + 0.5 * (y - z);
      if (cons.value(cand, w) > 1.0) {
        auto fz = [&](double t) { return cons.value(anchor + t * (cand - anchor), w) - 1.0; };
        cand = anchor + bisect_crossing(fz, 0.0, 1.0) * (cand - anchor);
      }
      if ((cand - z).norm() < 1e-14 * std::max(1.0, z.norm())) break;
      if ((y - cand).norm() <= (y - z).norm()) z = cand;
      else break;
    }
    const double gn = cons.grad_x(z, w).norm();
    const auto sol = boundary_newton(y, w, cons, z,
                                     -(y - z).norm() / std::max(gn, 1e-12), opts);
    iters += sol.iters;
    if (!sol.converged)
      throw NoConvergence("projection did not converge within " +
                          std::to_string(opts.max_iter) + " iterations");
    best_p = sol.p;
    best_dist = (y - best_p).norm();
    have = true;
  }

  // The scan minimum is a valid upper bound; a converged run that is
  // clearly worse picked a wrong critical point.
  if (best_dist > scan_dist * (1.0 + 1e-9) + opts.tol) {
    const double gn = cons.grad_x(scan_best, w).norm();
    const auto sol = boundary_newton(y, w, cons, scan_best,
                                     -scan_dist / std::max(gn, 1e-12), opts);
    iters += sol.iters;
    if (sol.converged && (y - sol.p).norm() < best_dist) {
      best_p = sol.p;
      best_dist = (y - sol.p).norm();
    }
  }

  out.point = best_p;
  out.distance = best_dist;
  out.newton_iters = iters;
  return out;
}

double distance_to_set(const Vec& y, const Vec& w, const LevelSetConstraint& cons,
                       const ProjectionOptions& opts) {
  if (cons.value(y, w) <= 1.0) return 0.0;
  return project_to_set(y, w, cons, opts).distance;
}

double distance_to_boundary(const Vec& x, const Vec& w, const LevelSetConstraint& cons,
                            const ProjectionOptions& opts) {
  const double Gx = cons.value(x, w);
  if (Gx > 1.0 + opts.level_tol) return project_to_set(x, w, cons, opts).distance;

  const auto dirs = sphere_directions(cons.state_dim, opts.scan_directions, kScanSeedTag);
  const double reach =
      (x - cons.interior_point(w)).norm() + cons.bounding_radius(w) * (1.0 + 1e-9);
  Vec best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const Vec& d : dirs) {
    // nearest crossing along the ray from x; pre-march finds the first
    // sign change since rays from x may cross the level set repeatedly
    auto f = [&](double t) { return cons.value(x + t * d, w) - 1.0; };
    const int pre = 128;
    double lo = 0.0, hi = -1.0;
    double prev = Gx - 1.0;
    for (int i = 1; i <= pre; ++i) {
      const double t = reach * i / pre;
      const double ft = f(t);
      if ((ft > 0.0) != (prev > 0.0)) {
        lo = reach * (i - 1) / pre;
        hi = t;
        break;
      }
      prev = ft;
    }
    if (hi < 0.0) continue;
    const double t_cross = bisect_crossing(f, lo, hi);
    if (t_cross < best_dist) {
      best_dist = t_cross;
      best = x + t_cross * d;
    }
  }
  if (!std::isfinite(best_dist))
    throw NoConvergence("no boundary crossing found from interior point");

  const double gn = cons.grad_x(best, w).norm();
  const auto sol =
      boundary_newton(x, w, cons, best, best_dist / std::max(gn, 1e-12), opts);
  if (sol.converged) best_dist = std::min(best_dist, (x - sol.p).norm());
  return best_dist;
}

Vec normal_ray(const Vec& x, const Vec& w, double d, const LevelSetConstraint& cons,
               const ProjectionOptions& opts) {
  if (d < 0.0) throw ConfigError("normal_ray: distance must be nonnegative");
  const double G = cons.value(x, w);
  if (std::abs(G - 1.0) > std::max(opts.level_tol, cons.level_tol))
    throw NotOnBoundary("normal_ray: |G - 1| = " + std::to_string(std::abs(G - 1.0)));
  const Vec g = cons.grad_x(x, w);
  const double gn = g.norm();
  if (gn < 1e-12) throw SolverError("normal_ray: vanishing gradient on the boundary");
  return x + (d / gn) * g;
}

double prox_inequality_residual(const Vec& x, const Vec& z, const Vec& w,
                                const LevelSetConstraint& cons) {
  const ConstantsBundle& cb = cons.constants;
  if (!(cb.c > 0.0)) throw SolverError("prox residual needs certified constants");
  const Vec g = cons.grad_x(x, w);
  const double gn = g.norm();
  if (gn < 1e-12) throw SolverError("prox residual: vanishing gradient");
  const Vec diff = x - z;
  return g.dot(diff) / gn + 0.5 * (cb.lambda / cb.c) * diff.squaredNorm();
}

double hausdorff_rate_bound(const ConstantsBundle& cb, double K) {
  if (!(cb.c > 0.0)) throw SolverError("hausdorff bound needs certified constants");
  const double base = 2.0 * cb.L / cb.c;
  if (!cb.coercivity_kappa || K <= 0.0) return base;
  const double kappa = *cb.coercivity_kappa;
  const double DK = 2.0 * K * cb.L / kappa;       // inverse of the linear growth at 2KL
  const double far = DK * cb.L / (kappa * cb.r);  // rate when the distance can reach r
  return std::max(base, far);
}

HausdorffEstimate hausdorff_estimate(const Vec& w1, const Vec& w2,
                                     const LevelSetConstraint& cons, int n_samples,
                                     std::uint64_t seed, std::optional<double> K) {
  HausdorffEstimate out;
  const auto dirs = sphere_directions(cons.state_dim, n_samples, seed);

  auto one_side = [&](const Vec& wa, const Vec& wb) {
    std::vector<Vec> dense_other;  // fallback boundary cloud of Z(wb)
    double worst = 0.0;
    for (const Vec& d : dirs) {
      const Vec b = boundary_point_on_ray(d, wa, cons);
      ++out.samples_used;
      if (cons.value(b, wb) <= 1.0) continue;
      double dist;
      try {
        dist = distance_to_set(b, wb, cons);
      } catch (const SolverError&) {
        ++out.failed_samples;
        if (dense_other.empty()) {
          const auto dd = sphere_directions(cons.state_dim, 4 * n_samples, seed + 1);
          for (const Vec& e : dd) dense_other.push_back(boundary_point_on_ray(e, wb, cons));
        }
        dist = std::numeric_limits<double>::infinity();
        for (const Vec& q : dense_other) dist = std::min(dist, (b - q).norm());
      }
      worst = std::max(worst, dist);
    }
    return worst;
  };

  out.value = std::max(one_side(w1, w2), one_side(w2, w1));
  const double Kv = K.value_or(std::max(w1.norm(), w2.norm()));
  out.rate_bound = hausdorff_rate_bound(cons.constants, Kv);
  out.bound = out.rate_bound * (w1 - w2).norm();
  return out;
}

}  // namespace sweep
