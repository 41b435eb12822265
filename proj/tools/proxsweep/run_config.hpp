#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sweep/certify.hpp"
#include "sweep/experiments.hpp"
#include "sweep/sweep_implicit.hpp"

namespace sweep::cli {

// Constraint family addressed by name.  Unused parameters keep their
// defaults; the validator only accepts keys belonging to the named family.
struct FamilySpec {
  std::string name;  // play | ball | star
  double rho = 1.0;  // play, ball: radius
  int dim = 2;       // ball: ambient dimension
  double R0 = 1.0;   // star: mean polar radius
  double a = 0.2;    // star: lobe amplitude
  int k = 3;         // star: lobe count
};

// A path is given either as inline node rows [t, v0, ...] or as a CSV file
// reference; the two forms are mutually exclusive.  Parsing resolves both
// to a concrete PLPath so later stages never touch the filesystem.
struct PathSpec {
  PLPath path;
  std::string source;  // "nodes" or the resolved file name
};

struct StateMapSpec {
  std::string kind = "linear";  // linear | tanh
  bool w_base_zero = false;     // "w_base": "zero" shorthand
  std::optional<PathSpec> w_base;
  std::vector<std::vector<double>> Gamma;  // param_dim x state_dim
  std::vector<std::vector<double>> Omega;  // optional, zero when absent
  double beta = 1.0;                       // tanh saturation scale
};

// Tuning knobs for the study subcommand; absent values keep the defaults
// of the corresponding study options struct.
struct StudySpec {
  std::string kind;  // continuity | lipschitz | implicit | order
  std::optional<std::vector<double>> scales;
  std::optional<std::uint64_t> seed;
  std::optional<int> segments;
  std::optional<bool> perturb_w;
  std::optional<double> floor_multiplier;
  std::optional<double> ratio_spread_limit;
  std::optional<int> levels;
  std::optional<double> shrink_requirement;
  bool use_oracle = true;  // order study on the play ramp compares against
                           // the exact clamp recursion
};

struct RunConfig {
  std::string subcommand;
  std::filesystem::path out_dir = ".";

  // Problem source: a named benchmark or an explicit family + paths spec.
  std::optional<std::string> benchmark;
  std::size_t grid_n = 0;        // 0 keeps the benchmark default or the
                                 // grid implied by the supplied paths
  double delta = 0.5;            // implicit-play: target contraction factor
  double epsilon = 0.1;          // implicit runs: audit weight steepness

  std::optional<FamilySpec> family;
  std::optional<PathSpec> u, w;
  std::optional<Vec> x0;
  std::optional<StateMapSpec> state_map;

  std::optional<CertifyOptions> certify;
  SolveOptions solver;
  PicardOptions picard;
  std::optional<StudySpec> study;
};

// Command line flags that take precedence over config values.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_n;
  std::optional<std::string> scheme;  // catchup | boundary-ode
  std::optional<std::string> out_dir;
  std::optional<std::string> study_kind;
};

// Parses and validates the JSON config text for `subcommand`, with command
// line flags taking precedence over config values.  Relative CSV references
// resolve against `config_dir`.  Throws ConfigError carrying the parse
// position, or one message listing every validation violation.
[[nodiscard]] RunConfig parse_config(const std::string& text,
                                     const std::string& subcommand,
                                     const std::filesystem::path& config_dir,
                                     const CliOverrides& overrides = {});

[[nodiscard]] Scheme parse_scheme(const std::string& name);

}  // namespace sweep::cli
