#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "sweep/certify.hpp"
#include "sweep/errors.hpp"
#include "sweep/families.hpp"

using namespace sweep;

namespace {

CertifyOptions quick_options(int param_dim) {
  CertifyOptions opts;
  opts.n_boundary = 128;
  opts.n_pairs = 1024;
  opts.n_box = 512;
  opts.n_params = 2;
  opts.w_samples = {Vec::Zero(param_dim)};
  return opts;
}

}  // namespace

TEST_CASE("ball certification reproduces the analytic constants") {
  const LevelSetConstraint ball = make_moving_ball(2, 1.0);
  CertifyOptions opts;
  opts.w_lo = {-0.5, -0.5};
  opts.w_hi = {0.5, 0.5};
  const CertificationReport report = certify(ball, opts);

  REQUIRE(report.all_pass);
  // |grad| = 2 everywhere on the unit sphere, shrunk by the floor safety
  CHECK(report.constants.c == doctest::Approx(0.95 * 2.0).epsilon(1e-9));
  // convex: the defect estimator bottoms out at the configured floor
  CHECK(report.constants.lambda == opts.lambda_floor);
  CHECK(report.constants.r == report.constants.c / report.constants.lambda);
  // tube gradient bound: 2 sqrt(level) at the tube edge, inflated by 1.05
  CHECK(report.constants.K0 <= 1.05 * 2.0 * std::sqrt(1.8) + 1e-9);
  CHECK(report.constants.K0 >= 2.0);

  const std::vector<std::string> names = {"gradient_floor", "monotonicity_defect",
                                          "tube_constants", "coercivity"};
  REQUIRE(report.clauses.size() == names.size());
  for (const auto& n : names) {
    const ClauseResult* cl = report.clause(n);
    REQUIRE(cl != nullptr);
    CHECK(cl->pass);
    CHECK(cl->samples > 0);
  }
  CHECK(report.clause("no_such_clause") == nullptr);
}

TEST_CASE("fresh-sample verification accepts certified bundles") {
  const LevelSetConstraint play = make_scalar_play(1.0);
  const CertifyOptions opts = quick_options(1);
  const CertificationReport report = certify(play, opts);
  REQUIRE(report.all_pass);
  CHECK(verify_bundle(play, report.constants, opts, 0xfeedbeef) == 0);
  CHECK(verify_bundle(play, report.constants, opts, 12345) == 0);
}

TEST_CASE("verification counts violations of an overconfident bundle") {
  const LevelSetConstraint ball = make_moving_ball(2, 1.0);
  const CertifyOptions opts = quick_options(2);
  ConstantsBundle wrong = ball.constants;
  wrong.c = 3.0;  // claims |grad| >= 3 on a surface where it is 2
  CHECK(verify_bundle(ball, wrong, opts, 777) > 0);
}

TEST_CASE("gradient floor and defect estimators on the star") {
  const LevelSetConstraint star = make_star_set(1.0, 0.2, 3);
  const CertifyOptions opts = quick_options(3);
  const double c_hat = estimate_gradient_floor(star, opts);
  CHECK(c_hat > 0.0);
  const double lambda_hat = estimate_hypomonotonicity(star, opts);
  // concave arcs between lobes force a genuine positive defect
  CHECK(lambda_hat > 10.0 * opts.lambda_floor);

  const ParamConstants pc = estimate_param_constants(star, opts);
  CHECK(pc.K0 >= c_hat);
  CHECK(pc.K1 > 0.0);
  CHECK(pc.L > 0.0);
  CHECK(pc.C0 > 0.0);
  CHECK(pc.C1 > 0.0);
}

TEST_CASE("with_certified_constants installs a usable bundle") {
  const LevelSetConstraint star =
      with_certified_constants(make_star_set(1.0, 0.2, 3), quick_options(3));
  CHECK(star.constants.c > 0.0);
  CHECK(star.constants.lambda > 0.0);
  CHECK(star.constants.r == star.constants.c / star.constants.lambda);
  // the tube is small but genuinely positive for this lobe geometry
  CHECK(star.constants.r > 0.1);
  CHECK(star.constants.r < 5.0);
}

TEST_CASE("declared coercivity is spot checked and can fail") {
  const LevelSetConstraint ball = make_moving_ball(2, 1.0);
  const CertifyOptions opts = quick_options(2);
  const CoercivityCheck good = check_coercivity(ball, opts, ball.constants.r);
  CHECK(good.checked);
  CHECK(good.pass);
  REQUIRE(good.worst_margins.size() == opts.coercivity_rhos.size());
  for (double m : good.worst_margins) CHECK(m >= 0.0);

  LevelSetConstraint brag = ball;
  brag.constants.coercivity_kappa = 50.0;  // far above the true linear rate
  const CoercivityCheck bad = check_coercivity(brag, opts, brag.constants.r);
  CHECK(bad.checked);
  CHECK(!bad.pass);

  CHECK_THROWS_AS((void)with_certified_constants(std::move(brag), opts), SolverError);
}

TEST_CASE("certification report serializes with a stable schema") {
  const LevelSetConstraint play = make_scalar_play(1.0);
  const CertifyOptions opts = quick_options(1);
  const CertificationReport report = certify(play, opts);
  const std::string text = certification_report_json(report);

  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("schema_version").get<int>() == 1);
  CHECK(j.at("kind").get<std::string>() == "certification");
  CHECK(j.at("all_pass").get<bool>());
  CHECK(j.at("constants").at("r").get<double>() == report.constants.r);
  CHECK(j.at("clauses").size() == report.clauses.size());
  CHECK(j.at("options").at("seed").get<std::uint64_t>() == opts.seed);

  // identical inputs serialize to identical bytes
  CHECK(certification_report_json(certify(play, opts)) == text);
}
