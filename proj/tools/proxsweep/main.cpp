#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "run_config.hpp"
#include "sweep/errors.hpp"

namespace {

struct SharedFlags {
  std::string config_file;
  std::string out_dir;
  std::string scheme;
  std::string kind;
  std::uint64_t seed = 0;
  int grid_n = 0;
};

void add_common_flags(CLI::App* sub, SharedFlags& flags, bool with_grid,
                      bool with_scheme) {
  sub->add_option("--config", flags.config_file, "JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", flags.out_dir, "output directory (default from config)");
  sub->add_option("--seed", flags.seed, "master RNG seed, overrides config seeds");
  if (with_grid)
    sub->add_option("--grid-n", flags.grid_n, "number of time steps")
        ->check(CLI::PositiveNumber);
  if (with_scheme)
    sub->add_option("--scheme", flags.scheme, "time stepping scheme")
        ->check(CLI::IsMember({"catchup", "boundary-ode"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solver, certifier and experiment driver for sweeping processes "
               "with prox-regular level-set constraints"};
  app.require_subcommand(1);
  SharedFlags flags;

  CLI::App* certify =
      app.add_subcommand("certify", "estimate and verify the constraint constants");
  add_common_flags(certify, flags, false, false);

  CLI::App* solve =
      app.add_subcommand("solve", "run one explicit sweeping problem");
  add_common_flags(solve, flags, true, true);

  CLI::App* solve_implicit = app.add_subcommand(
      "solve-implicit", "run one state-dependent problem to its fixed point");
  add_common_flags(solve_implicit, flags, true, true);

  CLI::App* study =
      app.add_subcommand("study", "run a perturbation or refinement study");
  add_common_flags(study, flags, true, true);
  study->add_option("--kind", flags.kind, "study kind")
      ->check(CLI::IsMember({"continuity", "lipschitz", "implicit", "order"}));

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  sweep::cli::CliOverrides overrides;
  if (sub->count("--out") > 0) overrides.out_dir = flags.out_dir;
  if (sub->count("--seed") > 0) overrides.seed = flags.seed;
  if (sub->get_option_no_throw("--grid-n") && sub->count("--grid-n") > 0)
    overrides.grid_n = flags.grid_n;
  if (sub->get_option_no_throw("--scheme") && sub->count("--scheme") > 0)
    overrides.scheme = flags.scheme;
  if (sub == study && sub->count("--kind") > 0) overrides.study_kind = flags.kind;

  try {
    std::ifstream in(flags.config_file);
    std::ostringstream text;
    text << in.rdbuf();
    if (!in) throw sweep::ConfigError("cannot read config file " + flags.config_file);

    const std::filesystem::path config_dir =
        std::filesystem::path(flags.config_file).parent_path();
    const sweep::cli::RunConfig cfg =
        sweep::cli::parse_config(text.str(), sub->get_name(), config_dir, overrides);
    return sweep::cli::run(cfg);
  } catch (const sweep::SweepGateViolated& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "hint: refine the grid by a factor of at least "
              << e.suggested_refinement() << " (see --grid-n)\n";
    return 2;
  } catch (const sweep::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sweep::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
