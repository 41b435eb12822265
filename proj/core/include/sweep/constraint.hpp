#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sweep/pl_path.hpp"

namespace sweep {

// Certified regularity constants of a moving level-set family.
//   c       lower bound on |grad_x G| along the unit level surface
//   lambda  one-sided monotonicity defect of grad_x G (0+ for convex sets)
//   r       uniqueness tube radius, always c / lambda exactly
//   L       Lipschitz bound of G in the parameter
//   K0, K1  bounds on |grad_x G|, |grad_w G| over the working tube
//   C0, C1  joint Lipschitz bounds of grad_x G, grad_w G over the tube
//   coercivity_kappa  declared linear growth rate of G - 1 in the distance
struct ConstantsBundle {
  double c = 0.0;
  double lambda = 0.0;
  double r = 0.0;
  double L = 0.0;
  double K0 = 0.0;
  double K1 = 0.0;
  double C0 = 0.0;
  double C1 = 0.0;
  std::optional<double> coercivity_kappa;

  static ConstantsBundle make(double c, double lambda, double L, double K0,
                              double K1, double C0, double C1,
                              std::optional<double> kappa = std::nullopt);
};

// Moving constraint set Z(w) = {x : G(x, w) <= 1} described by evaluators.
// The anchor must be interior for every admissible parameter and the set
// must be star shaped around it (all built-in families are); the radius
// bounds Z(w) inside a ball around the anchor.  Evaluators are pure.
struct LevelSetConstraint {
  int state_dim = 0;
  int param_dim = 0;
  std::string name;
  std::function<double(const Vec& x, const Vec& w)> value;
  std::function<Vec(const Vec& x, const Vec& w)> grad_x;
  std::function<Vec(const Vec& x, const Vec& w)> grad_w;
  std::function<Vec(const Vec& w)> interior_point;
  std::function<double(const Vec& w)> bounding_radius;
  ConstantsBundle constants;
  double level_tol = 1e-10;
};

struct ProjectionOptions {
  double tol = 1e-9;         // stationarity residual target
  double level_tol = 1e-10;  // |G - 1| target on the boundary
  int max_iter = 100;
  double safety_factor = 0.9;  // admissible fraction of the tube radius
  int scan_directions = 64;    // coarse boundary scan used for init/fallback
};

struct ProjectionResult {
  Vec point;
  double distance = 0.0;  // |y - point|, 0 for interior queries
  bool interior = false;  // query was already in the set
  int newton_iters = 0;
  bool used_fallback = false;
};

// Nearest point of Z(w).  Interior queries return the query itself.
// Exterior queries must lie within safety_factor * r of the set; beyond
// that the nearest point need not be unique and OutsideProxTube is raised.
[[nodiscard]] ProjectionResult project_to_set(const Vec& y, const Vec& w,
                                              const LevelSetConstraint& cons,
                                              const ProjectionOptions& opts = {});

[[nodiscard]] double distance_to_set(const Vec& y, const Vec& w,
                                     const LevelSetConstraint& cons,
                                     const ProjectionOptions& opts = {});

// Distance from an interior point to the level surface, by multistart ray
// scan polished with Newton on the stationarity system.
[[nodiscard]] double distance_to_boundary(const Vec& x, const Vec& w,
                                          const LevelSetConstraint& cons,
                                          const ProjectionOptions& opts = {});

// Point at distance d from the boundary point x along the outward unit
// gradient; its unique nearest point in Z(w) is x again while d stays
// inside the tube.  Requires |G(x,w) - 1| <= level_tol.
[[nodiscard]] Vec normal_ray(const Vec& x, const Vec& w, double d,
                             const LevelSetConstraint& cons,
                             const ProjectionOptions& opts = {});

// Left-hand side of the gradient-form obtuse-angle inequality at a
// boundary point x against a member z:
//   <grad/|grad|, x - z> + (lambda / 2c) |x - z|^2
// Nonnegative (up to tolerance) for every z in Z(w) when the constants hold.
[[nodiscard]] double prox_inequality_residual(const Vec& x, const Vec& z,
                                              const Vec& w,
                                              const LevelSetConstraint& cons);

struct HausdorffEstimate {
  double value = 0.0;        // sampled two-sided boundary excess
  double bound = 0.0;        // certified rate times |w1 - w2|
  double rate_bound = 0.0;   // the certified rate itself
  int samples_used = 0;
  int failed_samples = 0;
};

// Sampled Hausdorff distance between Z(w1) and Z(w2) plus the certified
// linear-in-parameter bound it is compared against.  K is the parameter
// magnitude entering the bound; pass the largest |w| of the run.
[[nodiscard]] HausdorffEstimate hausdorff_estimate(const Vec& w1, const Vec& w2,
                                                   const LevelSetConstraint& cons,
                                                   int n_samples,
                                                   std::uint64_t seed,
                                                   std::optional<double> K = {});

// Certified Hausdorff rate max(2L/c, D_K L / mu2(r)) with the declared
// linear coercivity mu2(rho) = kappa * rho; falls back to 2L/c when no
// coercivity rate is declared or K vanishes.
[[nodiscard]] double hausdorff_rate_bound(const ConstantsBundle& cb, double K);

// Deterministic boundary sample along ray `dir` from the anchor.
[[nodiscard]] Vec boundary_point_on_ray(const Vec& dir, const Vec& w,
                                        const LevelSetConstraint& cons);

// Deterministic unit directions: axis pair in 1-d, uniform angles in 2-d,
// Fibonacci sphere in 3-d, seeded Gaussian directions beyond.
[[nodiscard]] std::vector<Vec> sphere_directions(int dim, int count,
                                                 std::uint64_t seed);

}  // namespace sweep
