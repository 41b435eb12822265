#pragma once

#include <cstddef>
#include <vector>

namespace sweep {

// Strictly increasing partition of [0, T] starting at 0. Grids are value
// types; refinement always inserts nodes and never moves existing ones.
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> nodes);

  static TimeGrid uniform(double t_end, std::size_t num_steps);

  [[nodiscard]] std::size_t num_nodes() const { return nodes_.size(); }
  [[nodiscard]] std::size_t num_steps() const { return nodes_.size() - 1; }
  [[nodiscard]] double node(std::size_t k) const { return nodes_[k]; }
  [[nodiscard]] double t_end() const { return nodes_.back(); }
  [[nodiscard]] double dt(std::size_t k) const { return nodes_[k + 1] - nodes_[k]; }
  [[nodiscard]] double max_step() const;
  [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }

  // Index k with node(k) <= t <= node(k+1); clamps t outside [0, T].
  [[nodiscard]] std::size_t locate(double t) const;

  // New grid with every step split into `factor` equal substeps.
  [[nodiscard]] TimeGrid refined(std::size_t factor) const;

  // Union of the node sets.  Nodes closer than a relative tolerance are
  // identified (keeps grids produced by repeated uniform construction
  // from accumulating phantom nodes).
  [[nodiscard]] static TimeGrid merge(const TimeGrid& a, const TimeGrid& b);

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.nodes_ == b.nodes_;
  }

 private:
  std::vector<double> nodes_;
};

}  // namespace sweep
