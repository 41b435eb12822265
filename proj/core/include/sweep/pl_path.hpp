#pragma once

#include <Eigen/Core>
#include <vector>

#include "sweep/time_grid.hpp"

namespace sweep {

using Vec = Eigen::VectorXd;

// Continuous piecewise-linear path: values at grid nodes, affine in
// between.  All norms and distances on these paths reduce to exact sums
// over steps, so no quadrature enters the library.
class PLPath {
 public:
  PLPath() = default;
  PLPath(TimeGrid grid, std::vector<Vec> values);

  static PLPath constant(const TimeGrid& grid, const Vec& value);
  // Samples f at the grid nodes.
  template <typename F>
  static PLPath sample(const TimeGrid& grid, int dim, F&& f) {
    std::vector<Vec> vals;
    vals.reserve(grid.num_nodes());
    for (std::size_t k = 0; k < grid.num_nodes(); ++k) {
      Vec v = f(grid.node(k));
      vals.push_back(std::move(v));
    }
    (void)dim;
    return PLPath(grid, std::move(vals));
  }

  [[nodiscard]] const TimeGrid& grid() const { return grid_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const Vec& node_value(std::size_t k) const { return values_[k]; }
  [[nodiscard]] const std::vector<Vec>& values() const { return values_; }

  [[nodiscard]] Vec value(double t) const;
  // Constant slope on step k.
  [[nodiscard]] Vec derivative(std::size_t k) const;

  // Same function on a finer grid (new nodes take interpolated values,
  // so the path is unchanged pointwise).
  [[nodiscard]] PLPath on_grid(const TimeGrid& fine) const;
  [[nodiscard]] PLPath refined(std::size_t factor) const;

 private:
  TimeGrid grid_;
  std::vector<Vec> values_;
  int dim_ = 0;
};

// Exponentially decaying weight exp(-M(t)/epsilon) driven by a
// nondecreasing scalar accumulator M with M(0) = 0.
class WeightProfile {
 public:
  WeightProfile() = default;
  WeightProfile(PLPath accumulator, double epsilon);

  [[nodiscard]] double epsilon() const { return epsilon_; }
  [[nodiscard]] const PLPath& accumulator() const { return accumulator_; }
  [[nodiscard]] double weight(double t) const;

 private:
  PLPath accumulator_;
  double epsilon_ = 1.0;
};

// Shared refinement: both paths re-expressed on the union grid.
void refine_to_common_grid(PLPath& p, PLPath& q);

// W11 distance |p(0)-q(0)| + int |p'-q'| dt, evaluated exactly.
[[nodiscard]] double w11_distance(const PLPath& p, const PLPath& q);

// Seminorm int w(t)|p'(t)| dt with the weight evaluated at step midpoints.
[[nodiscard]] double weighted_w11_seminorm(const PLPath& p, const WeightProfile& w);

// Unweighted variation int |p'| dt.
[[nodiscard]] double w11_seminorm(const PLPath& p);

// Max node-wise distance on the union grid; equals the sup distance of the
// interpolants because the difference is piecewise linear.
[[nodiscard]] double sup_distance(const PLPath& p, const PLPath& q);

}  // namespace sweep
