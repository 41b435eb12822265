#include "sweep/pl_path.hpp"

#include <cmath>

#include "sweep/errors.hpp"

namespace sweep {

PLPath::PLPath(TimeGrid grid, std::vector<Vec> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.num_nodes())
    throw ConfigError("path needs one value per grid node");
  dim_ = static_cast<int>(values_.front().size());
  if (dim_ == 0) throw ConfigError("path values must be non-empty vectors");
  for (const Vec& v : values_)
    if (v.size() != dim_) throw ConfigError("path values must share one dimension");
}

PLPath PLPath::constant(const TimeGrid& grid, const Vec& value) {
  return PLPath(grid, std::vector<Vec>(grid.num_nodes(), value));
}

Vec PLPath::value(double t) const {
  const std::size_t k = grid_.locate(t);
  const double a = grid_.node(k), b = grid_.node(k + 1);
  double s = (t - a) / (b - a);
  s = std::min(1.0, std::max(0.0, s));
  return (1.0 - s) * values_[k] + s * values_[k + 1];
}

Vec PLPath::derivative(std::size_t k) const {
  return (values_[k + 1] - values_[k]) / grid_.dt(k);
}

PLPath PLPath::on_grid(const TimeGrid& fine) const {
  std::vector<Vec> vals;
  vals.reserve(fine.num_nodes());
  for (std::size_t k = 0; k < fine.num_nodes(); ++k) vals.push_back(value(fine.node(k)));
  return PLPath(fine, std::move(vals));
}

PLPath PLPath::refined(std::size_t factor) const { return on_grid(grid_.refined(factor)); }

WeightProfile::WeightProfile(PLPath accumulator, double epsilon)
    : accumulator_(std::move(accumulator)), epsilon_(epsilon) {
  if (!(epsilon_ > 0.0)) throw ConfigError("weight profile needs epsilon > 0");
  if (accumulator_.dim() != 1)
    throw ConfigError("weight accumulator must be a scalar path");
  if (accumulator_.node_value(0)(0) != 0.0)
    throw ConfigError("weight accumulator must start at 0");
  for (std::size_t k = 0; k + 1 < accumulator_.grid().num_nodes(); ++k)
    if (accumulator_.node_value(k + 1)(0) < accumulator_.node_value(k)(0))
      throw ConfigError("weight accumulator must be nondecreasing");
}

double WeightProfile::weight(double t) const {
  return std::exp(-accumulator_.value(t)(0) / epsilon_);
}

void refine_to_common_grid(PLPath& p, PLPath& q) {
  if (std::abs(p.grid().t_end() - q.grid().t_end()) >
      1e-12 * std::max(1.0, p.grid().t_end()))
    throw ConfigError("paths live on different horizons");
  const TimeGrid common = TimeGrid::merge(p.grid(), q.grid());
  p = p.on_grid(common);
  q = q.on_grid(common);
}

double w11_distance(const PLPath& p, const PLPath& q) {
  if (p.dim() != q.dim()) throw ConfigError("w11_distance: dimension mismatch");
  PLPath a = p, b = q;
  refine_to_common_grid(a, b);
  double acc = (a.node_value(0) - b.node_value(0)).norm();
  for (std::size_t k = 0; k + 1 < a.grid().num_nodes(); ++k)
    acc += (a.derivative(k) - b.derivative(k)).norm() * a.grid().dt(k);
  return acc;
}

double weighted_w11_seminorm(const PLPath& p, const WeightProfile& w) {
  PLPath a = p, m = w.accumulator();
  refine_to_common_grid(a, m);
  const WeightProfile refined(m, w.epsilon());
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < a.grid().num_nodes(); ++k) {
    const double mid = 0.5 * (a.grid().node(k) + a.grid().node(k + 1));
    acc += refined.weight(mid) * a.derivative(k).norm() * a.grid().dt(k);
  }
  return acc;
}

double w11_seminorm(const PLPath& p) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < p.grid().num_nodes(); ++k)
    acc += p.derivative(k).norm() * p.grid().dt(k);
  return acc;
}

double sup_distance(const PLPath& p, const PLPath& q) {
  if (p.dim() != q.dim()) throw ConfigError("sup_distance: dimension mismatch");
  PLPath a = p, b = q;
  refine_to_common_grid(a, b);
  double best = 0.0;
  for (std::size_t k = 0; k < a.grid().num_nodes(); ++k)
    best = std::max(best, (a.node_value(k) - b.node_value(k)).norm());
  return best;
}

}  // namespace sweep
