#include "sweep/time_grid.hpp"

#include <algorithm>
#include <cmath>

#include "sweep/errors.hpp"

namespace sweep {

namespace {
// Nodes closer than this (relative to the horizon) are the same node.
constexpr double kMergeRelTol = 1e-12;
}  // namespace

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw ConfigError("time grid needs at least two nodes");
  if (nodes_.front() != 0.0) throw ConfigError("time grid must start at t = 0");
  for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
    if (!(nodes_[k] < nodes_[k + 1]))
      throw ConfigError("time grid nodes must be strictly increasing");
  }
}

TimeGrid TimeGrid::uniform(double t_end, std::size_t num_steps) {
  if (!(t_end > 0.0) || num_steps == 0)
    throw ConfigError("uniform grid needs t_end > 0 and at least one step");
  std::vector<double> nodes(num_steps + 1);
  for (std::size_t k = 0; k <= num_steps; ++k)
    nodes[k] = t_end * static_cast<double>(k) / static_cast<double>(num_steps);
  nodes.front() = 0.0;
  nodes.back() = t_end;
  return TimeGrid(std::move(nodes));
}

double TimeGrid::max_step() const {
  double h = 0.0;
  for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) h = std::max(h, dt(k));
  return h;
}

std::size_t TimeGrid::locate(double t) const {
  if (t <= nodes_.front()) return 0;
  if (t >= nodes_.back()) return nodes_.size() - 2;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

TimeGrid TimeGrid::refined(std::size_t factor) const {
  if (factor == 0) throw ConfigError("refinement factor must be positive");
  if (factor == 1) return *this;
  std::vector<double> out;
  out.reserve(num_steps() * factor + 1);
  for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
    const double a = nodes_[k], b = nodes_[k + 1];
    for (std::size_t j = 0; j < factor; ++j)
      out.push_back(a + (b - a) * static_cast<double>(j) / static_cast<double>(factor));
  }
  out.push_back(nodes_.back());
  return TimeGrid(std::move(out));
}

TimeGrid TimeGrid::merge(const TimeGrid& a, const TimeGrid& b) {
  const double tol = kMergeRelTol * std::max(1.0, std::max(a.t_end(), b.t_end()));
  std::vector<double> out;
  out.reserve(a.num_nodes() + b.num_nodes());
  std::size_t i = 0, j = 0;
  while (i < a.num_nodes() || j < b.num_nodes()) {
    double next;
    if (i == a.num_nodes()) next = b.node(j++);
    else if (j == b.num_nodes()) next = a.node(i++);
    else if (std::abs(a.node(i) - b.node(j)) <= tol) {
      next = a.node(i);  // identified; keep the first grid's representative
      ++i;
      ++j;
    } else if (a.node(i) < b.node(j)) next = a.node(i++);
    else next = b.node(j++);
    if (out.empty() || next - out.back() > tol) out.push_back(next);
  }
  return TimeGrid(std::move(out));
}

}  // namespace sweep
