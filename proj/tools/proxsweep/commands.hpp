#pragma once

#include "run_config.hpp"

namespace sweep::cli {

// Builders shared by the subcommands and the driver tests.
[[nodiscard]] LevelSetConstraint build_family(const FamilySpec& spec);
[[nodiscard]] SweepProblem build_explicit_problem(const RunConfig& cfg);
[[nodiscard]] ImplicitProblem build_implicit_problem(const RunConfig& cfg);

// Subcommand bodies.  Each writes its reports atomically under cfg.out_dir
// and returns the process exit code: 0 when every check passed, 1 when a
// check failed but reports were written.  Solver failures propagate as
// SolverError and map to exit code 2 in the driver.
[[nodiscard]] int run_certify(const RunConfig& cfg);
[[nodiscard]] int run_solve(const RunConfig& cfg);
[[nodiscard]] int run_solve_implicit(const RunConfig& cfg);
[[nodiscard]] int run_study(const RunConfig& cfg);

[[nodiscard]] int run(const RunConfig& cfg);

}  // namespace sweep::cli
