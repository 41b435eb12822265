#include <cmath>

#include "doctest.h"
#include "sweep/errors.hpp"
#include "sweep/families.hpp"
#include "sweep/rng.hpp"

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

// Central finite difference of G in x, used to audit analytic gradients.
Vec fd_grad_x(const LevelSetConstraint& cons, const Vec& x, const Vec& w,
              double h = 1e-6) {
  Vec g(cons.state_dim);
  for (int j = 0; j < cons.state_dim; ++j) {
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    g(j) = (cons.value(xp, w) - cons.value(xm, w)) / (2.0 * h);
  }
  return g;
}

Vec fd_grad_w(const LevelSetConstraint& cons, const Vec& x, const Vec& w,
              double h = 1e-6) {
  Vec g(cons.param_dim);
  for (int j = 0; j < cons.param_dim; ++j) {
    Vec wp = w, wm = w;
    wp(j) += h;
    wm(j) -= h;
    g(j) = (cons.value(x, wp) - cons.value(x, wm)) / (2.0 * h);
  }
  return g;
}

// Reference play stepper on a very fine grid: project the advanced state
// onto the current window.  First-order accurate, independent code path.
double brute_force_play_deficit(const PLPath& u, const PLPath& w, double rho,
                                double x0, double t_end, int n) {
  double x = x0;
  for (int k = 1; k <= n; ++k) {
    const double t = t_end * k / n;
    const double uc = u.value(t)(0);
    const double wc = w.value(t)(0);
    const double prev_xi = u.value(t_end * (k - 1) / n)(0) - x;
    x = std::clamp(uc - prev_xi, wc - rho, wc + rho);
  }
  return u.value(t_end)(0) - x;
}

}  // namespace

TEST_CASE("level saturation blends identity into a cap") {
  CHECK(saturate_level(0.0) == 0.0);
  CHECK(saturate_level(1.3) == 1.3);
  CHECK(saturate_level(2.0) == 2.0);
  CHECK(saturate_level(3.0) == doctest::Approx(2.8125).epsilon(1e-15));
  CHECK(saturate_level(4.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(saturate_level(10.0) == 3.0);

  CHECK(saturate_level_slope(1.9) == 1.0);
  CHECK(saturate_level_slope(2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(saturate_level_slope(4.0) == doctest::Approx(0.0).epsilon(1e-12));
  // monotone level: slope never negative
  for (double s = 0.0; s <= 5.0; s += 0.01) CHECK(saturate_level_slope(s) >= -1e-15);
}

TEST_CASE("scalar play set and constants") {
  const LevelSetConstraint play = make_scalar_play(0.5);
  REQUIRE(play.state_dim == 1);
  REQUIRE(play.param_dim == 1);
  const Vec w = vec1(0.2);
  CHECK(play.value(vec1(0.2), w) == 0.0);
  CHECK(play.value(vec1(0.7), w) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(play.value(vec1(-0.3), w) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((play.grad_x(vec1(0.7), w) - fd_grad_x(play, vec1(0.7), w)).norm() <= 1e-8);
  CHECK((play.grad_w(vec1(0.7), w) - fd_grad_w(play, vec1(0.7), w)).norm() <= 1e-8);

  // window of radius rho: |grad| = 2|x-w|/rho^2 = 2/rho on the boundary
  const ConstantsBundle& cb = play.constants;
  CHECK(cb.c == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(cb.r == cb.c / cb.lambda);
  CHECK(cb.K1 == doctest::Approx(cb.K0).epsilon(1e-15));
  CHECK(cb.coercivity_kappa.has_value());
}

TEST_CASE("moving ball gradients and analytic constants") {
  const LevelSetConstraint ball = make_moving_ball(2, 1.0);
  const Vec w = vec2(1.0, -0.5);
  const Vec x = w + vec2(0.6, 0.8);
  CHECK(ball.value(x, w) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((ball.grad_x(x, w) - fd_grad_x(ball, x, w)).norm() <= 1e-8);
  CHECK((ball.grad_w(x, w) - fd_grad_w(ball, x, w)).norm() <= 1e-8);
  CHECK((ball.grad_x(x, w) + ball.grad_w(x, w)).norm() <= 1e-12);

  CHECK(ball.constants.c == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(ball.constants.C0 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(ball.interior_point(w) == w);
  CHECK(ball.bounding_radius(w) >= 1.0);
}

TEST_CASE("star set matches its polar description") {
  const LevelSetConstraint star = make_star_set(1.0, 0.2, 3);
  REQUIRE(star.state_dim == 2);
  REQUIRE(star.param_dim == 3);

  for (double phi : {0.0, 0.4}) {
    Vec w(3);
    w << 0.3, -0.2, phi;
    for (double th = 0.05; th < 6.2; th += 0.37) {
      const double R = 1.0 * (1.0 + 0.2 * std::cos(3.0 * (th - phi)));
      const Vec x = vec2(w(0) + R * std::cos(th), w(1) + R * std::sin(th));
      CHECK(star.value(x, w) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK((star.grad_x(x, w) - fd_grad_x(star, x, w)).norm() <= 1e-6);
      CHECK((star.grad_w(x, w) - fd_grad_w(star, x, w)).norm() <= 1e-6);
    }
    // anchor is well interior
    CHECK(star.value(star.interior_point(w), w) == 0.0);
  }
  CHECK_THROWS_AS(make_star_set(1.0, 1.0, 3), ConfigError);
}

TEST_CASE("play oracle against a brute-force stepper") {
  const TimeGrid grid({0.0, 0.5, 1.0, 1.6, 2.0});
  const PLPath u(grid, {vec1(0.0), vec1(1.6), vec1(-0.4), vec1(0.9), vec1(0.9)});
  const PLPath wc(grid, {vec1(0.0), vec1(0.0), vec1(0.3), vec1(0.3), vec1(-0.2)});

  const PLPath xi = play_oracle(u, wc, 0.7, 0.1);
  REQUIRE(xi.dim() == 1);
  CHECK(xi.value(0.0)(0) == doctest::Approx(-0.1).epsilon(1e-14));

  const double ref = brute_force_play_deficit(u, wc, 0.7, 0.1, 2.0, 200000);
  CHECK(std::abs(xi.value(2.0)(0) - ref) <= 5e-4);  // stepper is O(h), h = 1e-5

  // deficit flat whenever the state is strictly inside the window
  for (std::size_t k = 0; k + 1 < xi.grid().num_nodes(); ++k) {
    const double t_mid = 0.5 * (xi.grid().node(k) + xi.grid().node(k + 1));
    const double x = u.value(t_mid)(0) - xi.value(t_mid)(0);
    const double gap = 0.7 - std::abs(x - wc.value(t_mid)(0));
    if (gap > 1e-6) CHECK(std::abs(xi.derivative(k)(0)) <= 1e-10);
  }
}

TEST_CASE("play oracle rides the window edge while pressing") {
  const TimeGrid grid({0.0, 1.0});
  const PLPath u(grid, {vec1(0.0), vec1(2.0)});
  const PLPath wc = PLPath::constant(grid, vec1(0.0));
  const PLPath xi = play_oracle(u, wc, 1.0, 0.0);
  // contact at t = 1/2, afterwards x == 1 and xi == u - 1
  CHECK(xi.value(0.25)(0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(xi.value(0.5)(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(xi.value(0.75)(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(xi.value(1.0)(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("linear state map reports exact operator norms") {
  const TimeGrid grid({0.0, 1.0});
  Mat Gamma(1, 1), Omega(1, 1);
  Gamma << -0.3;
  Omega << 0.1;
  const PLPath base(grid, {vec1(0.2), vec1(0.6)});
  const StateMap map = make_state_map_linear(base, Gamma, Omega);

  CHECK(map.gamma == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(map.omega == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(map.c_xi == 0.0);
  CHECK(map.c_u == 0.0);
  const Vec v = map.value(0.5, vec1(2.0), vec1(1.0));
  CHECK(v(0) == doctest::Approx(0.4 - 0.3 + 0.2).epsilon(1e-12));
  // time rate bound equals |w_base'|
  CHECK(map.rate_a.value(0.5)(0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(map.rate_b.value(0.5)(0) == 0.0);
}

TEST_CASE("tanh state map stays within declared sensitivities") {
  const TimeGrid grid({0.0, 1.0});
  Mat Gamma(1, 1);
  Gamma << 0.5;
  const StateMap map = make_state_map_tanh(PLPath::constant(grid, vec1(0.0)), Gamma, 0.8);
  CHECK(map.gamma == doctest::Approx(0.8 * 0.5).epsilon(1e-12));

  std::mt19937_64 rng = make_rng(2, 4);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const Vec xi1 = vec1(unif(rng)), xi2 = vec1(unif(rng));
    const Vec d = map.value(0.3, vec1(0.0), xi1) - map.value(0.3, vec1(0.0), xi2);
    CHECK(d.norm() <= map.gamma * (xi1 - xi2).norm() + 1e-12);
    const Mat J = map.d_xi(0.3, vec1(0.0), xi1);
    CHECK(J.norm() <= map.gamma + 1e-12);
  }
}

TEST_CASE("benchmark builders produce certified, feasible problems") {
  const SweepProblem play = make_play_ramp_problem(50);
  CHECK(play.u.value(1.0)(0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(play.constraint.constants.c > 0.0);

  const SweepProblem ball = make_dragging_ball_problem(50);
  CHECK(ball.u.grid().t_end() == 2.0);
  CHECK(ball.w.value(2.0)(0) == doctest::Approx(2.0).epsilon(1e-15));

  const SweepProblem star = make_star_drag_problem(60);
  CHECK(star.constraint.constants.c > 0.0);
  CHECK(star.constraint.constants.r ==
        star.constraint.constants.c / star.constraint.constants.lambda);
  CHECK(star.constraint.value(star.x0, star.w.value(0.0)) <= 1.0 + 1e-10);
}

TEST_CASE("implicit play benchmark hits the requested contraction factor") {
  const ImplicitProblem prob = make_implicit_play_problem(50, 0.5);
  const ContractionInfo info = check_contraction(prob);
  CHECK(info.delta == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(info.delta_star == doctest::Approx((0.5 + 0.1) / 0.9).epsilon(1e-12));
}
