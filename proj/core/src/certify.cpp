#include "sweep/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "sweep/errors.hpp"
#include "sweep/rng.hpp"

namespace sweep {

namespace {

constexpr std::uint64_t kParamTag = 0x70;
constexpr std::uint64_t kFloorTag = 0x71;
constexpr std::uint64_t kPairTag = 0x72;
constexpr std::uint64_t kBoxTag = 0x73;
constexpr std::uint64_t kCoerciveTag = 0x74;
constexpr std::uint64_t kFreshSalt = 0x5eedf00dULL;

std::string sample_witness(const char* what, int idx, double value) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s at sample %d (value %.6g)", what, idx, value);
  return buf;
}

// Deterministic cycled parameter draws: uniform over the declared box, or
// the explicit list when one is given.
struct ParamStream {
  std::vector<Vec> draws;

  ParamStream(const LevelSetConstraint& cons, const CertifyOptions& opts,
              std::uint64_t seed) {
    if (!opts.w_samples.empty()) {
      draws = opts.w_samples;
      for (const Vec& w : draws)
        if (w.size() != cons.param_dim)
          throw ConfigError("certify parameter sample dimension mismatch");
      return;
    }
    if (opts.w_lo.empty() || opts.w_hi.empty())
      throw ConfigError("certify needs a parameter box (w_lo/w_hi) or explicit samples");
    if (static_cast<int>(opts.w_lo.size()) != cons.param_dim ||
        static_cast<int>(opts.w_hi.size()) != cons.param_dim)
      throw ConfigError("certify parameter box dimension mismatch");
    auto rng = make_rng(seed, kParamTag);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec mid(cons.param_dim);
    for (int j = 0; j < cons.param_dim; ++j) {
      if (opts.w_lo[j] > opts.w_hi[j]) throw ConfigError("certify parameter box inverted");
      mid(j) = 0.5 * (opts.w_lo[j] + opts.w_hi[j]);
    }
    draws.push_back(mid);
    for (int i = 1; i < std::max(opts.n_params, 1); ++i) {
      Vec w(cons.param_dim);
      for (int j = 0; j < cons.param_dim; ++j)
        w(j) = opts.w_lo[j] + (opts.w_hi[j] - opts.w_lo[j]) * unif(rng);
      draws.push_back(w);
    }
  }

  const Vec& at(int i) const { return draws[static_cast<std::size_t>(i) % draws.size()]; }
};

Vec gaussian_direction(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss;
  Vec d(dim);
  double n = 0.0;
  do {
    for (int j = 0; j < dim; ++j) d(j) = gauss(rng);
    n = d.norm();
  } while (n < 1e-12);
  return d / n;
}

// Pulls a box draw into the sublevel set along the anchor ray.
Vec make_member(const LevelSetConstraint& cons, const Vec& w, const Vec& y) {
  if (cons.value(y, w) <= 1.0) return y;
  const Vec a = cons.interior_point(w);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double m = 0.5 * (lo + hi);
    if (cons.value(a + m * (y - a), w) <= 1.0)
      lo = m;
    else
      hi = m;
  }
  return a + 0.999 * lo * (y - a);
}

Vec box_draw(const LevelSetConstraint& cons, const Vec& w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Vec a = cons.interior_point(w);
  const double R = cons.bounding_radius(w);
  Vec y(cons.state_dim);
  for (int j = 0; j < cons.state_dim; ++j) y(j) = a(j) + 1.45 * R * unif(rng);
  return y;
}

// Draw from the working tube by rejection; gives up after a few tries and
// falls back to a set member, which is always inside the tube.
Vec tube_draw(const LevelSetConstraint& cons, const Vec& w, double tube_level,
              std::mt19937_64& rng) {
  for (int tries = 0; tries < 24; ++tries) {
    Vec y = box_draw(cons, w, rng);
    if (cons.value(y, w) <= tube_level) return y;
  }
  return make_member(cons, w, box_draw(cons, w, rng));
}

// Shared pair draw for defect estimation and verification: x on the unit
// level surface, z either a nearby boundary point or a set member.
Vec pair_partner(const LevelSetConstraint& cons, const Vec& w, const Vec& dir, int i,
                 std::mt19937_64& rng) {
  if (i % 2 == 0) {
    const double eta = (i % 6 == 0) ? 0.05 : (i % 6 == 2 ? 0.3 : 1.0);
    Vec dir2 = dir + eta * gaussian_direction(rng, cons.state_dim);
    if (dir2.norm() < 1e-9) dir2 = -dir;
    return boundary_point_on_ray(dir2.normalized(), w, cons);
  }
  return make_member(cons, w, box_draw(cons, w, rng));
}

int verify_floor(const LevelSetConstraint& cons, double c_hat, const CertifyOptions& opts,
                 std::uint64_t seed, std::string* witness) {
  ParamStream params(cons, opts, seed);
  auto rng = make_rng(seed, kFloorTag);
  int bad = 0;
  for (int i = 0; i < opts.n_boundary; ++i) {
    const Vec& w = params.at(i);
    const Vec b = boundary_point_on_ray(gaussian_direction(rng, cons.state_dim), w, cons);
    const double gn = cons.grad_x(b, w).norm();
    if (gn < c_hat) {
      if (witness && bad == 0) *witness = sample_witness("gradient below floor", i, gn);
      ++bad;
    }
  }
  return bad;
}

int verify_prox(const LevelSetConstraint& cons, double c_hat, double lambda_hat,
                const CertifyOptions& opts, std::uint64_t seed, std::string* witness) {
  LevelSetConstraint probe = cons;
  probe.constants.c = c_hat;
  probe.constants.lambda = lambda_hat;
  ParamStream params(cons, opts, seed);
  auto rng = make_rng(seed, kPairTag);
  int bad = 0;
  const double slack = 1e-7;
  for (int i = 0; i < opts.n_pairs; ++i) {
    const Vec& w = params.at(i);
    const Vec dir = gaussian_direction(rng, cons.state_dim);
    const Vec x = boundary_point_on_ray(dir, w, cons);
    const Vec z = pair_partner(cons, w, dir, i, rng);
    if ((x - z).norm() < 1e-9) continue;
    if (cons.grad_x(x, w).norm() < 1e-12) continue;
    const double res = prox_inequality_residual(x, z, w, probe);
    const double scale = std::max(1.0, (x - z).norm());
    if (res < -slack * scale) {
      if (witness && bad == 0) *witness = sample_witness("prox inequality residual", i, res);
      ++bad;
    }
  }
  return bad;
}

int verify_params(const LevelSetConstraint& cons, const ParamConstants& pc,
                  const CertifyOptions& opts, std::uint64_t seed, std::string* witness) {
  ParamStream params(cons, opts, seed);
  auto rng = make_rng(seed, kBoxTag);
  int bad = 0;
  for (int i = 0; i < opts.n_box; ++i) {
    const Vec& w = params.at(i);
    const Vec& w2 = params.at(i + 1);
    const Vec x = tube_draw(cons, w, opts.tube_level, rng);
    const double gx = cons.grad_x(x, w).norm();
    const double gw = cons.grad_w(x, w).norm();
    const double dw = (w - w2).norm();
    double dl = 0.0;
    if (dw > 1e-12) dl = std::abs(cons.value(x, w) - cons.value(x, w2)) / dw;
    if (gx > pc.K0 || gw > pc.K1 || dl > pc.L) {
      if (witness && bad == 0)
        *witness = sample_witness("tube constant exceeded", i, std::max({gx, gw, dl}));
      ++bad;
    }
  }
  return bad;
}

}  // namespace

double estimate_gradient_floor(const LevelSetConstraint& cons, const CertifyOptions& opts) {
  ParamStream params(cons, opts, opts.seed);
  auto rng = make_rng(opts.seed, kFloorTag);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < opts.n_boundary; ++i) {
    const Vec& w = params.at(i);
    const Vec b = boundary_point_on_ray(gaussian_direction(rng, cons.state_dim), w, cons);
    worst = std::min(worst, cons.grad_x(b, w).norm());
  }
  return opts.floor_safety * worst;
}

double estimate_hypomonotonicity(const LevelSetConstraint& cons, const CertifyOptions& opts) {
  const double c_hat = estimate_gradient_floor(cons, opts);
  ParamStream params(cons, opts, opts.seed);
  auto rng = make_rng(opts.seed, kPairTag);
  double worst = 0.0;
  for (int i = 0; i < opts.n_pairs; ++i) {
    const Vec& w = params.at(i);
    const Vec dir = gaussian_direction(rng, cons.state_dim);
    const Vec x = boundary_point_on_ray(dir, w, cons);
    const Vec z = pair_partner(cons, w, dir, i, rng);
    const double d2 = (x - z).squaredNorm();
    if (d2 < 1e-18) continue;
    const Vec gx = cons.grad_x(x, w);
    const double gn = gx.norm();
    if (gn < 1e-12) continue;
    // inward dip of set members below the tangent plane at x, normalized to
    // the defect rate lambda / c that enters the obtuse-angle inequality
    const double ratio = -2.0 * gx.dot(x - z) / (gn * d2);
    worst = std::max(worst, ratio);
  }
  return std::max(opts.lipschitz_safety * c_hat * worst, opts.lambda_floor);
}

ParamConstants estimate_param_constants(const LevelSetConstraint& cons,
                                        const CertifyOptions& opts) {
  ParamStream params(cons, opts, opts.seed);
  auto rng = make_rng(opts.seed, kBoxTag);
  ParamConstants pc{0.0, 0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < opts.n_box; ++i) {
    const Vec& w = params.at(i);
    const Vec& w2 = params.at(i + 1);
    const Vec x = tube_draw(cons, w, opts.tube_level, rng);
    const Vec x2 = tube_draw(cons, w, opts.tube_level, rng);

    pc.K0 = std::max(pc.K0, cons.grad_x(x, w).norm());
    pc.K1 = std::max(pc.K1, cons.grad_w(x, w).norm());

    const double dw = (w - w2).norm();
    if (dw > 1e-12)
      pc.L = std::max(pc.L, std::abs(cons.value(x, w) - cons.value(x, w2)) / dw);

    const double sep = (x - x2).norm() + dw;
    if (sep > 1e-12) {
      pc.C0 = std::max(pc.C0, (cons.grad_x(x, w) - cons.grad_x(x2, w2)).norm() / sep);
      pc.C1 = std::max(pc.C1, (cons.grad_w(x, w) - cons.grad_w(x2, w2)).norm() / sep);
    }
  }
  const double floor = opts.constant_floor;
  pc.L = std::max(opts.lipschitz_safety * pc.L, floor);
  pc.K0 = std::max(opts.lipschitz_safety * pc.K0, floor);
  pc.K1 = std::max(opts.lipschitz_safety * pc.K1, floor);
  pc.C0 = std::max(opts.lipschitz_safety * pc.C0, floor);
  pc.C1 = std::max(opts.lipschitz_safety * pc.C1, floor);
  return pc;
}

CoercivityCheck check_coercivity(const LevelSetConstraint& cons, const CertifyOptions& opts,
                                 double prox_radius_hint) {
  CoercivityCheck out;
  if (!cons.constants.coercivity_kappa) {
    out.checked = false;
    out.pass = true;
    return out;
  }
  out.checked = true;
  out.pass = true;
  out.kappa = *cons.constants.coercivity_kappa;
  ParamStream params(cons, opts, opts.seed);
  auto rng = make_rng(opts.seed, kCoerciveTag);
  const int per_rho = std::max(opts.n_boundary / 4, 32);
  for (double rho : opts.coercivity_rhos) {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < per_rho; ++i) {
      const Vec& w = params.at(i);
      const Vec dir = gaussian_direction(rng, cons.state_dim);
      Vec y;
      if (rho <= 0.85 * prox_radius_hint) {
        // inside the tube the normal ray realizes the distance exactly
        const Vec b = boundary_point_on_ray(dir, w, cons);
        y = normal_ray(b, w, rho, cons);
      } else {
        // far regime: anchor-ray points beyond the bounding sphere keep
        // distance >= rho by the triangle inequality
        const Vec a = cons.interior_point(w);
        y = a + (cons.bounding_radius(w) + rho * (1.0 + 1e-9)) * dir;
      }
      const double margin = (cons.value(y, w) - 1.0) - out.kappa * rho;
      if (margin < worst) {
        worst = margin;
        if (margin < 0.0) out.witness = sample_witness("coercivity margin", i, margin);
      }
    }
    out.rhos.push_back(rho);
    out.worst_margins.push_back(worst);
    if (worst < 0.0) out.pass = false;
  }
  return out;
}

CertificationReport certify(const LevelSetConstraint& cons, const CertifyOptions& opts) {
  CertificationReport rep;
  rep.family = cons.name;
  rep.options = opts;
  const std::uint64_t fresh = opts.seed ^ kFreshSalt;

  const double c_hat = estimate_gradient_floor(cons, opts);
  {
    ClauseResult cl;
    cl.name = "gradient_floor";
    cl.estimate = c_hat;
    cl.samples = opts.n_boundary;
    cl.pass = c_hat > 0.0;
    if (!cl.pass) cl.witness = "estimated floor not positive";
    const int bad = verify_floor(cons, c_hat, opts, fresh, &cl.witness);
    cl.worst = bad;
    if (bad > 0) cl.pass = false;
    rep.clauses.push_back(cl);
  }

  const double lambda_hat = estimate_hypomonotonicity(cons, opts);
  {
    ClauseResult cl;
    cl.name = "monotonicity_defect";
    cl.estimate = lambda_hat;
    cl.samples = opts.n_pairs;
    cl.pass = std::isfinite(lambda_hat) && lambda_hat > 0.0;
    const int bad = verify_prox(cons, c_hat, lambda_hat, opts, fresh, &cl.witness);
    cl.worst = bad;
    if (bad > 0) cl.pass = false;
    rep.clauses.push_back(cl);
  }

  const ParamConstants pc = estimate_param_constants(cons, opts);
  {
    ClauseResult cl;
    cl.name = "tube_constants";
    cl.estimate = pc.K0;
    cl.samples = opts.n_box;
    cl.pass = true;
    const int bad = verify_params(cons, pc, opts, fresh, &cl.witness);
    cl.worst = bad;
    if (bad > 0) cl.pass = false;
    rep.clauses.push_back(cl);
  }

  rep.constants = ConstantsBundle::make(c_hat, lambda_hat, pc.L, pc.K0, pc.K1, pc.C0,
                                        pc.C1, cons.constants.coercivity_kappa);

  const CoercivityCheck cc = check_coercivity(cons, opts, rep.constants.r);
  if (cc.checked) {
    ClauseResult cl;
    cl.name = "coercivity";
    cl.estimate = cc.kappa;
    cl.worst = cc.worst_margins.empty()
                   ? 0.0
                   : *std::min_element(cc.worst_margins.begin(), cc.worst_margins.end());
    cl.samples = std::max(opts.n_boundary / 4, 32) *
                 static_cast<int>(opts.coercivity_rhos.size());
    cl.pass = cc.pass;
    cl.witness = cc.witness;
    rep.clauses.push_back(cl);
  }

  rep.all_pass = true;
  for (const auto& cl : rep.clauses) rep.all_pass = rep.all_pass && cl.pass;
  return rep;
}

int verify_bundle(const LevelSetConstraint& cons, const ConstantsBundle& bundle,
                  const CertifyOptions& opts, std::uint64_t fresh_seed) {
  ParamConstants pc{bundle.L, bundle.K0, bundle.K1, bundle.C0, bundle.C1};
  int bad = verify_floor(cons, bundle.c, opts, fresh_seed, nullptr);
  bad += verify_prox(cons, bundle.c, bundle.lambda, opts, fresh_seed, nullptr);
  bad += verify_params(cons, pc, opts, fresh_seed, nullptr);
  return bad;
}

LevelSetConstraint with_certified_constants(LevelSetConstraint cons,
                                            const CertifyOptions& opts) {
  CertificationReport rep = certify(cons, opts);
  if (!rep.all_pass) {
    std::string msg = "certification failed for " + cons.name + ":";
    for (const auto& cl : rep.clauses)
      if (!cl.pass) msg += " [" + cl.name + ": " + cl.witness + "]";
    throw SolverError(msg);
  }
  cons.constants = rep.constants;
  return cons;
}

const ClauseResult* CertificationReport::clause(const std::string& name) const {
  for (const auto& cl : clauses)
    if (cl.name == name) return &cl;
  return nullptr;
}

}  // namespace sweep
