#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sweep/errors.hpp"
#include "sweep/path_io.hpp"
#include "sweep/pl_path.hpp"
#include "sweep/time_grid.hpp"

using namespace sweep;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("uniform grid layout") {
  const TimeGrid g = TimeGrid::uniform(1.0, 4);
  REQUIRE(g.num_nodes() == 5);
  CHECK(g.num_steps() == 4);
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.t_end() == 1.0);
  CHECK(g.dt(1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.max_step() == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(TimeGrid({0.0}), ConfigError);
  CHECK_THROWS_AS(TimeGrid({0.5, 1.0}), ConfigError);
  CHECK_THROWS_AS(TimeGrid({0.0, 0.2, 0.2}), ConfigError);
}

TEST_CASE("locate brackets the query") {
  const TimeGrid g({0.0, 0.3, 1.0, 1.4});
  CHECK(g.locate(0.0) == 0);
  CHECK(g.locate(0.3) == 1);
  CHECK(g.locate(0.9) == 1);
  CHECK(g.locate(1.4) == 2);
}

TEST_CASE("merge is the sorted union") {
  const TimeGrid a({0.0, 0.5, 1.0});
  const TimeGrid b({0.0, 0.25, 0.5, 1.0});
  const TimeGrid m = TimeGrid::merge(a, b);
  REQUIRE(m.num_nodes() == 4);
  CHECK(m.node(1) == 0.25);
  CHECK(TimeGrid::merge(a, a) == a);
}

TEST_CASE("refined splits every step evenly") {
  const TimeGrid g({0.0, 0.4, 1.0});
  const TimeGrid r = g.refined(2);
  REQUIRE(r.num_nodes() == 5);
  CHECK(r.node(1) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(r.node(3) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(r.max_step() == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("path interpolation and slopes") {
  const PLPath p(TimeGrid({0.0, 1.0, 2.0}), {vec1(0.0), vec1(2.0), vec1(1.0)});
  CHECK(p.value(0.5)(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.value(1.5)(0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(p.derivative(0)(0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(p.derivative(1)(0) == doctest::Approx(-1.0).epsilon(1e-15));
  // variation adds the absolute slopes times the step widths
  CHECK(w11_seminorm(p) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("on_grid leaves the function unchanged") {
  const PLPath p(TimeGrid({0.0, 1.0, 2.0}), {vec2(0, 1), vec2(2, 0), vec2(1, 1)});
  const PLPath q = p.on_grid(TimeGrid::merge(p.grid(), TimeGrid::uniform(2.0, 7)));
  REQUIRE(q.grid().num_nodes() >= p.grid().num_nodes());
  for (double t : {0.0, 0.17, 0.5, 1.0, 1.3, 1.99, 2.0})
    CHECK((p.value(t) - q.value(t)).norm() <= 1e-15);
  CHECK(w11_seminorm(p) == doctest::Approx(w11_seminorm(q)).epsilon(1e-14));
}

TEST_CASE("w11 distance against a hand computation") {
  // p(t) = (t, 0), q(t) = (0, t) on one step: same start, slope gap (1, -1)
  const PLPath p(TimeGrid({0.0, 1.0}), {vec2(0, 0), vec2(1, 0)});
  const PLPath q(TimeGrid({0.0, 1.0}), {vec2(0, 0), vec2(0, 1)});
  CHECK(w11_distance(p, q) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(sup_distance(p, q) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  // shifting the start adds the initial gap
  const PLPath q2(TimeGrid({0.0, 1.0}), {vec2(0.25, 0), vec2(0.25, 1)});
  CHECK(w11_distance(p, q2) ==
        doctest::Approx(0.25 + std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("refine_to_common_grid preserves both paths") {
  PLPath p(TimeGrid({0.0, 0.6, 1.0}), {vec1(0), vec1(3), vec1(3)});
  PLPath q(TimeGrid({0.0, 0.5, 1.0}), {vec1(1), vec1(1), vec1(0)});
  const PLPath p0 = p, q0 = q;
  refine_to_common_grid(p, q);
  CHECK(p.grid() == q.grid());
  for (double t : {0.0, 0.5, 0.55, 0.6, 1.0}) {
    CHECK((p.value(t) - p0.value(t)).norm() <= 1e-15);
    CHECK((q.value(t) - q0.value(t)).norm() <= 1e-15);
  }
}

TEST_CASE("weight profile decays with the accumulator") {
  const PLPath acc(TimeGrid({0.0, 1.0}), {vec1(0.0), vec1(2.0)});
  const WeightProfile w(acc, 0.5);
  CHECK(w.weight(0.0) == 1.0);
  CHECK(w.weight(1.0) == doctest::Approx(std::exp(-4.0)).epsilon(1e-15));

  // single step, slope 1, weight read at the midpoint
  const PLPath p(TimeGrid({0.0, 1.0}), {vec1(0.0), vec1(1.0)});
  CHECK(weighted_w11_seminorm(p, w) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-15));

  CHECK_THROWS_AS(WeightProfile(acc, 0.0), ConfigError);
  const PLPath down(TimeGrid({0.0, 1.0}), {vec1(0.0), vec1(-1.0)});
  CHECK_THROWS_AS(WeightProfile(down, 0.5), ConfigError);
}

TEST_CASE("csv round trip is bit faithful") {
  const PLPath p(TimeGrid({0.0, 1.0 / 3.0, 1.0}),
                 {vec2(0.1, -2.0), vec2(1e-17, 3.5), vec2(-0.25, 1.0 / 7.0)});
  std::stringstream buf;
  write_path_csv(p, buf);
  const PLPath q = read_path_csv(buf);
  REQUIRE(q.grid().num_nodes() == 3);
  REQUIRE(q.dim() == 2);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(q.grid().node(k) == p.grid().node(k));
    CHECK(q.node_value(k) == p.node_value(k));
  }
}

TEST_CASE("csv rejects malformed input") {
  {
    std::stringstream buf("time,v0\n0,1\n1,2\n");
    CHECK_THROWS_AS(read_path_csv(buf), ConfigError);
  }
  {
    std::stringstream buf("t,v0,v1\n0,1\n");
    CHECK_THROWS_AS(read_path_csv(buf), ConfigError);
  }
  {
    std::stringstream buf("t,v0\n0,abc\n1,2\n");
    CHECK_THROWS_AS(read_path_csv(buf), ConfigError);
  }
}

TEST_CASE("atomic file write replaces content completely") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sweep_paths_test";
  fs::create_directories(dir);
  const fs::path file = dir / "path.csv";

  const PLPath p(TimeGrid({0.0, 1.0}), {vec1(0.0), vec1(4.0)});
  write_path_csv_file(p, file);
  const PLPath q1 = read_path_csv_file(file);
  CHECK(q1.node_value(1)(0) == 4.0);

  const PLPath p2(TimeGrid({0.0, 2.0}), {vec1(1.0), vec1(0.0)});
  write_path_csv_file(p2, file);
  const PLPath q2 = read_path_csv_file(file);
  CHECK(q2.grid().t_end() == 2.0);

  // no temporary droppings next to the target
  std::size_t entries = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
  fs::remove_all(dir);
}
