#include <filesystem>
#include <fstream>
#include <string>

#include "commands.hpp"
#include "doctest.h"
#include "run_config.hpp"
#include "sweep/errors.hpp"

using namespace sweep;
using namespace sweep::cli;

namespace {

RunConfig parse(const std::string& text, const std::string& sub,
                const CliOverrides& overrides = {}) {
  return parse_config(text, sub, std::filesystem::path("."), overrides);
}

// Empty string means the config parsed cleanly.
std::string rejection(const std::string& text, const std::string& sub,
                      const CliOverrides& overrides = {}) {
  try {
    (void)parse(text, sub, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

int count_bullets(const std::string& msg) {
  int n = 0;
  for (std::size_t pos = msg.find("\n  - "); pos != std::string::npos;
       pos = msg.find("\n  - ", pos + 1))
    ++n;
  return n;
}

constexpr const char* kPlayFamilyBody = R"(
  "family": {"name": "play", "rho": 1.0},
  "u": {"nodes": [[0, 0], [1, 2]]},
  "w": {"nodes": [[0, 0], [1, 0]]},
  "x0": [0]
)";

}  // namespace

TEST_CASE("benchmark config fills defaults") {
  const RunConfig cfg = parse(R"({"benchmark": "play-ramp"})", "solve");
  CHECK(cfg.subcommand == "solve");
  REQUIRE(cfg.benchmark.has_value());
  CHECK(*cfg.benchmark == "play-ramp");
  CHECK(cfg.out_dir == ".");
  CHECK(cfg.grid_n == 0);
  CHECK(cfg.solver.scheme == Scheme::catching_up);
  CHECK_FALSE(cfg.family.has_value());
}

TEST_CASE("unknown keys are rejected with their location") {
  const std::string msg = rejection(
      R"({"benchmark": "play-ramp", "solver": {"bogus": 1}})", "solve");
  CHECK(msg.find("solver: unknown key 'bogus'") != std::string::npos);
}

TEST_CASE("all violations come back in one message") {
  const std::string msg = rejection(
      R"({"family": {"name": "play"}, "u": {"nodes": [[0, 0], [1, 2]]},
          "w": {"nodes": [[0, 0], [1, 0]]}, "typo": 1})",
      "solve");
  CHECK(count_bullets(msg) == 2);
  CHECK(msg.find("unknown key 'typo'") != std::string::npos);
  CHECK(msg.find("missing required field 'x0'") != std::string::npos);
}

TEST_CASE("inline nodes and csv reference are mutually exclusive") {
  const std::string msg = rejection(
      std::string(R"({"family": {"name": "play"},
                      "u": {"nodes": [[0, 0], [1, 2]], "csv": "u.csv"},
                      "w": {"nodes": [[0, 0], [1, 0]]}, "x0": [0]})"),
      "solve");
  CHECK(msg.find("mutually exclusive") != std::string::npos);
}

TEST_CASE("json syntax errors carry the parse position") {
  const std::string msg = rejection("{\n  \"benchmark\": oops\n}", "solve");
  CHECK(msg.find("config parse:") != std::string::npos);
  CHECK(msg.find("line") != std::string::npos);
}

TEST_CASE("csv path references resolve against the config directory") {
  const auto dir = std::filesystem::temp_directory_path() / "proxsweep_cfg_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "u.csv");
    out << "t,v0\n0,0\n1,2\n";
  }
  const std::string text = std::string(R"({"family": {"name": "play"},
      "u": {"csv": "u.csv"},
      "w": {"nodes": [[0, 0], [1, 0]]}, "x0": [0]})");
  const RunConfig cfg = parse_config(text, "solve", dir, {});
  REQUIRE(cfg.u.has_value());
  CHECK(cfg.u->path.value(1.0)(0) == 2.0);
  CHECK(cfg.u->source.find("u.csv") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("master seed feeds stages that did not pin their own") {
  const RunConfig cfg = parse(
      R"({"benchmark": "play-ramp", "seed": 42})", "solve");
  CHECK(cfg.solver.seed == 42);

  const RunConfig pinned = parse(
      R"({"benchmark": "play-ramp", "seed": 42, "solver": {"seed": 7}})", "solve");
  CHECK(pinned.solver.seed == 7);

  const RunConfig cert = parse(
      R"({"family": {"name": "ball", "rho": 1.0}, "seed": 42, "certify": {}})",
      "certify");
  REQUIRE(cert.certify.has_value());
  CHECK(cert.certify->seed == 42);
}

TEST_CASE("input and window paths must share a horizon") {
  const std::string msg = rejection(
      R"({"family": {"name": "play"},
          "u": {"nodes": [[0, 0], [1, 2]]},
          "w": {"nodes": [[0, 0], [2, 0]]}, "x0": [0]})",
      "solve");
  CHECK(msg.find("share one time horizon") != std::string::npos);
}

TEST_CASE("state map kinds reject keys belonging to the other kind") {
  const char* linear_with_beta = R"({
    "family": {"name": "play"}, "u": {"nodes": [[0, 0], [1, 2]]}, "x0": [0],
    "state_map": {"kind": "linear", "w_base": "zero", "Gamma": [[0.25]], "beta": 2.0}})";
  CHECK(rejection(linear_with_beta, "solve-implicit")
            .find("'beta' only applies to the tanh kind") != std::string::npos);

  const char* tanh_with_omega = R"({
    "family": {"name": "play"}, "u": {"nodes": [[0, 0], [1, 2]]}, "x0": [0],
    "state_map": {"kind": "tanh", "w_base": "zero", "Gamma": [[0.25]],
                  "Omega": [[0.1]]}})";
  CHECK(rejection(tanh_with_omega, "solve-implicit")
            .find("'Omega' only applies to the linear kind") != std::string::npos);
}

TEST_CASE("star family needs an explicit certification block") {
  const std::string msg = rejection(
      R"({"family": {"name": "star", "R0": 1.0, "a": 0.2, "k": 3},
          "u": {"nodes": [[0, 0, 0], [1, 0, 0]]},
          "w": {"nodes": [[0, 0, 0, 0], [1, 0, 0, 0.3]]},
          "x0": [0.5, 0]})",
      "solve");
  CHECK(msg.find("add a 'certify' block") != std::string::npos);
}

TEST_CASE("benchmark names are validated per subcommand") {
  CHECK(rejection(R"({"benchmark": "implicit-play"})", "solve")
            .find("unknown benchmark") != std::string::npos);
  CHECK(rejection(R"({"benchmark": "play-ramp"})", "solve-implicit")
            .find("unknown benchmark") != std::string::npos);
  CHECK(rejection(R"({"benchmark": "no-such"})", "solve")
            .find("star-drag") != std::string::npos);
}

TEST_CASE("command line flags override config values") {
  CliOverrides ov;
  ov.grid_n = 500;
  ov.scheme = "boundary-ode";
  ov.seed = 9;
  ov.out_dir = "/tmp/elsewhere";
  const RunConfig cfg =
      parse(R"({"benchmark": "play-ramp", "grid_n": 100, "seed": 1})", "solve", ov);
  CHECK(cfg.grid_n == 500);
  CHECK(cfg.solver.scheme == Scheme::boundary_ode);
  CHECK(cfg.solver.seed == 9);
  CHECK(cfg.out_dir == "/tmp/elsewhere");
}

TEST_CASE("study kind comes from the config or the flag") {
  CHECK(rejection(R"({"benchmark": "play-ramp"})", "study")
            .find("missing study kind") != std::string::npos);

  CliOverrides ov;
  ov.study_kind = "continuity";
  const RunConfig cfg = parse(R"({"benchmark": "play-ramp"})", "study", ov);
  REQUIRE(cfg.study.has_value());
  CHECK(cfg.study->kind == "continuity");

  CHECK(rejection(R"({"benchmark": "play-ramp", "kind": "wibble"})", "study")
            .find("unknown study kind") != std::string::npos);
}

TEST_CASE("build resolves benchmarks to ready problems") {
  RunConfig cfg = parse(R"({"benchmark": "dragging-ball"})", "solve");
  const SweepProblem prob = build_explicit_problem(cfg);
  CHECK(prob.constraint.state_dim == 2);
  CHECK(prob.u.grid().t_end() == 2.0);

  cfg.grid_n = 123;
  const SweepProblem fine = build_explicit_problem(cfg);
  CHECK(fine.u.grid().num_nodes() >= 124);
}

TEST_CASE("family route parses fully and builds") {
  const std::string text = std::string("{") + kPlayFamilyBody + "}";
  const RunConfig cfg = parse(text, "solve");
  const SweepProblem prob = build_explicit_problem(cfg);
  CHECK(prob.constraint.state_dim == 1);
  CHECK(prob.u.value(1.0)(0) == 2.0);
  CHECK(prob.x0(0) == 0.0);
}

TEST_CASE("star family with a quick certification builds usable constants") {
  const std::string text = R"({
    "family": {"name": "star", "R0": 1.0, "a": 0.2, "k": 3},
    "u": {"nodes": [[0, 0, 0], [1, 0, 0]]},
    "w": {"nodes": [[0, 0, 0, 0], [1, 0, 0, 0.3]]},
    "x0": [0.5, 0],
    "certify": {"seed": 1, "n_boundary": 96, "n_pairs": 512, "n_box": 256,
                "n_params": 3, "w_lo": [-0.1, -0.1, -0.4],
                "w_hi": [0.1, 0.1, 0.4]}})";
  const RunConfig cfg = parse(text, "solve");
  const SweepProblem prob = build_explicit_problem(cfg);
  CHECK(prob.constraint.constants.r > 0.0);
  CHECK(prob.constraint.constants.c > 0.0);
}

TEST_CASE("state map shape mismatches name the offending block") {
  const char* text = R"({
    "family": {"name": "play"}, "u": {"nodes": [[0, 0], [1, 2]]}, "x0": [0],
    "state_map": {"kind": "linear", "w_base": "zero", "Gamma": [[0.25, 0.5]]}})";
  const RunConfig cfg = parse(text, "solve-implicit");
  CHECK_THROWS_WITH_AS((void)build_implicit_problem(cfg),
                       doctest::Contains("state_map.Gamma"), ConfigError);
}
