#include "commands.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "sweep/errors.hpp"
#include "sweep/families.hpp"
#include "sweep/path_io.hpp"

namespace sweep::cli {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr std::size_t kDefaultBenchmarkSteps = 400;

Mat to_matrix(const std::vector<std::vector<double>>& rows) {
  Mat m(static_cast<Eigen::Index>(rows.size()),
        static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

std::string shape_text(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

CertifyOptions certify_options_for(const RunConfig& cfg, const LevelSetConstraint& cons) {
  CertifyOptions opts = cfg.certify.value_or(CertifyOptions{});
  // With no parameter box and no explicit samples, certify at the origin
  // parameter; every built-in family is well defined there.
  if (opts.w_lo.empty() && opts.w_samples.empty())
    opts.w_samples = {Vec::Zero(cons.param_dim)};
  return opts;
}

LevelSetConstraint build_constraint(const RunConfig& cfg) {
  LevelSetConstraint cons = build_family(*cfg.family);
  if (cfg.certify) {
    const CertifyOptions opts = certify_options_for(cfg, cons);
    cons = with_certified_constants(std::move(cons), opts);
  }
  return cons;
}

PLPath refine_to_steps(const PLPath& path, std::size_t grid_n) {
  if (grid_n == 0) return path;
  const TimeGrid uniform = TimeGrid::uniform(path.grid().t_end(), grid_n);
  return path.on_grid(TimeGrid::merge(path.grid(), uniform));
}

void write_json_atomic(const std::filesystem::path& file, const ordered_json& j) {
  write_text_file_atomic(file, j.dump(2) + "\n");
}

void write_study_outputs(const RunConfig& cfg, const StudyResult& result) {
  std::filesystem::create_directories(cfg.out_dir);
  write_text_file_atomic(cfg.out_dir / ("study_" + result.kind + ".csv"),
                         study_csv(result));
  write_text_file_atomic(cfg.out_dir / ("study_" + result.kind + ".json"),
                         study_json(result));
}

}  // namespace

LevelSetConstraint build_family(const FamilySpec& spec) {
  if (spec.name == "play") return make_scalar_play(spec.rho);
  if (spec.name == "ball") return make_moving_ball(spec.dim, spec.rho);
  return make_star_set(spec.R0, spec.a, spec.k);
}

SweepProblem build_explicit_problem(const RunConfig& cfg) {
  if (cfg.benchmark) {
    const std::size_t n = cfg.grid_n ? cfg.grid_n : kDefaultBenchmarkSteps;
    if (*cfg.benchmark == "play-ramp") return make_play_ramp_problem(n);
    if (*cfg.benchmark == "dragging-ball") return make_dragging_ball_problem(n);
    return make_star_drag_problem(n);
  }
  LevelSetConstraint cons = build_constraint(cfg);
  PLPath u = refine_to_steps(cfg.u->path, cfg.grid_n);
  PLPath w = refine_to_steps(cfg.w->path, cfg.grid_n);
  return SweepProblem(std::move(cons), std::move(u), std::move(w), *cfg.x0);
}

ImplicitProblem build_implicit_problem(const RunConfig& cfg) {
  if (cfg.benchmark) {
    const std::size_t n = cfg.grid_n ? cfg.grid_n : kDefaultBenchmarkSteps;
    return make_implicit_play_problem(n, cfg.delta, cfg.epsilon);
  }
  LevelSetConstraint cons = build_constraint(cfg);
  PLPath u = refine_to_steps(cfg.u->path, cfg.grid_n);
  const StateMapSpec& sm = *cfg.state_map;

  Mat Gamma = to_matrix(sm.Gamma);
  if (Gamma.rows() != cons.param_dim || Gamma.cols() != cons.state_dim)
    throw ConfigError("state_map.Gamma has shape " + shape_text(Gamma) + ", needs " +
                      std::to_string(cons.param_dim) + "x" +
                      std::to_string(cons.state_dim));
  PLPath w_base = sm.w_base_zero
                      ? PLPath::constant(u.grid(), Vec::Zero(cons.param_dim))
                      : sm.w_base->path;
  if (w_base.dim() != cons.param_dim)
    throw ConfigError("state_map.w_base has dimension " +
                      std::to_string(w_base.dim()) + ", needs " +
                      std::to_string(cons.param_dim));

  StateMap map;
  if (sm.kind == "linear") {
    Mat Omega = sm.Omega.empty() ? Mat(Mat::Zero(Gamma.rows(), Gamma.cols()))
                                 : to_matrix(sm.Omega);
    if (Omega.rows() != cons.param_dim || Omega.cols() != cons.state_dim)
      throw ConfigError("state_map.Omega has shape " + shape_text(Omega) + ", needs " +
                        std::to_string(cons.param_dim) + "x" +
                        std::to_string(cons.state_dim));
    map = make_state_map_linear(std::move(w_base), std::move(Gamma), std::move(Omega));
  } else {
    map = make_state_map_tanh(std::move(w_base), std::move(Gamma), sm.beta);
  }
  return ImplicitProblem(std::move(cons), std::move(u), *cfg.x0, std::move(map),
                         cfg.epsilon);
}

int run_certify(const RunConfig& cfg) {
  LevelSetConstraint cons = build_family(*cfg.family);
  const CertifyOptions opts = certify_options_for(cfg, cons);
  const CertificationReport report = certify(cons, opts);

  std::filesystem::create_directories(cfg.out_dir);
  const auto file = cfg.out_dir / "certification.json";
  write_text_file_atomic(file, certification_report_json(report));

  for (const auto& cl : report.clauses)
    std::cout << (cl.pass ? "pass  " : "FAIL  ") << cl.name << "  estimate "
              << cl.estimate << "\n";
  std::cout << "certification " << (report.all_pass ? "passed" : "FAILED")
            << " for family '" << report.family << "', report " << file.string()
            << "\n";
  return report.all_pass ? 0 : 1;
}

int run_solve(const RunConfig& cfg) {
  const SweepProblem prob = build_explicit_problem(cfg);
  const Trajectory traj = solve(prob, cfg.solver);

  const RateBoundReport rate_report = rate_bound_check(prob, traj);
  const ViReport vi_report = vi_check(prob, traj, cfg.solver.vi_samples, cfg.solver.seed);

  const double rate = gate_rate(prob, cfg.solver.gate_use_sampled_rate, cfg.solver.seed);
  const double gate_limit = cfg.solver.gate_fraction * prob.constraint.constants.r;
  double worst_motion = 0.0;
  for (std::size_t k = 0; k < prob.u.grid().num_steps(); ++k) {
    const double du = (prob.u.node_value(k + 1) - prob.u.node_value(k)).norm();
    const double dw = (prob.w.node_value(k + 1) - prob.w.node_value(k)).norm();
    worst_motion = std::max(worst_motion, du + rate * dw);
  }
  const bool pass = rate_report.pass && vi_report.pass;

  std::filesystem::create_directories(cfg.out_dir);
  std::ostringstream csv;
  write_trajectory_csv(traj, csv);
  write_text_file_atomic(cfg.out_dir / "trajectory.csv", csv.str());

  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "run";
  j["pass"] = pass;
  j["scheme"] = to_string(traj.scheme);
  j["num_steps"] = prob.u.grid().num_steps();
  j["t_end"] = prob.u.grid().t_end();
  j["seed"] = cfg.solver.seed;
  j["gate"] = {{"rate", rate},
               {"limit", gate_limit},
               {"worst_step_motion", worst_motion},
               {"margin", gate_limit - worst_motion},
               {"sampled_rate", cfg.solver.gate_use_sampled_rate}};
  j["rate_bound"] = {{"pass", rate_report.pass},
                     {"worst_margin", rate_report.worst_margin},
                     {"worst_step", rate_report.worst_step},
                     {"scale", rate_report.scale}};
  j["vi"] = {{"pass", vi_report.pass},
             {"worst", vi_report.worst},
             {"worst_step", vi_report.worst_step},
             {"scale", vi_report.scale}};
  write_json_atomic(cfg.out_dir / "run_report.json", j);

  std::cout << "solve " << to_string(traj.scheme) << ": " << prob.u.grid().num_steps()
            << " steps, rate-bound margin " << rate_report.worst_margin
            << ", vi residual " << vi_report.worst << " -> "
            << (pass ? "pass" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

int run_solve_implicit(const RunConfig& cfg) {
  const ImplicitProblem prob = build_implicit_problem(cfg);
  const PicardResult result = solve_picard(prob, cfg.picard);
  const IterationReport& rep = result.report;
  const bool pass = rep.converged && !rep.ratio_flagged;

  std::filesystem::create_directories(cfg.out_dir);
  std::ostringstream csv;
  write_trajectory_csv(result.trajectory, csv);
  write_text_file_atomic(cfg.out_dir / "trajectory.csv", csv.str());
  write_path_csv_file(result.w, cfg.out_dir / "w.csv");

  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "picard";
  j["pass"] = pass;
  j["contraction"] = {{"delta", rep.info.delta},
                      {"delta_star", rep.info.delta_star},
                      {"m0", rep.info.m0},
                      {"m1", rep.info.m1},
                      {"epsilon", prob.epsilon}};
  j["converged"] = rep.converged;
  j["iterations"] = rep.iterations;
  j["budget"] = rep.budget;
  j["final_residual"] = rep.final_residual;
  j["ratio_flagged"] = rep.ratio_flagged;
  j["worst_ratio"] = rep.worst_ratio;
  ordered_json entries = ordered_json::array();
  for (const auto& e : rep.entries)
    entries.push_back({{"weighted_dist", e.weighted_dist},
                       {"plain_dist", e.plain_dist},
                       {"ratio", e.ratio},
                       {"envelope_margin", e.envelope_margin}});
  j["entries"] = std::move(entries);
  write_json_atomic(cfg.out_dir / "iteration_report.json", j);

  std::cout << "solve-implicit: delta " << rep.info.delta << ", " << rep.iterations
            << " of " << rep.budget << " budgeted iterations, residual "
            << rep.final_residual << " -> " << (pass ? "pass" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

int run_study(const RunConfig& cfg) {
  const StudySpec& spec = *cfg.study;
  StudyResult result;

  if (spec.kind == "continuity") {
    ContinuityOptions opts;
    opts.solver = cfg.solver;
    if (spec.scales) opts.scales = *spec.scales;
    if (spec.seed) opts.seed = *spec.seed;
    if (spec.segments) opts.shape_segments = *spec.segments;
    if (spec.perturb_w) opts.perturb_w = *spec.perturb_w;
    if (spec.floor_multiplier) opts.floor_multiplier = *spec.floor_multiplier;
    result = continuity_study(build_explicit_problem(cfg), opts);
  } else if (spec.kind == "lipschitz") {
    LipschitzOptions opts;
    opts.solver = cfg.solver;
    if (spec.scales) opts.scales = *spec.scales;
    if (spec.seed) opts.seed = *spec.seed;
    if (spec.segments) opts.shape_segments = *spec.segments;
    if (spec.perturb_w) opts.perturb_w = *spec.perturb_w;
    if (spec.ratio_spread_limit) opts.ratio_spread_limit = *spec.ratio_spread_limit;
    result = lipschitz_study(build_explicit_problem(cfg), opts);
  } else if (spec.kind == "implicit") {
    ImplicitLipschitzOptions opts;
    opts.picard = cfg.picard;
    if (spec.scales) opts.scales = *spec.scales;
    if (spec.seed) opts.seed = *spec.seed;
    if (spec.segments) opts.shape_segments = *spec.segments;
    if (spec.ratio_spread_limit) opts.ratio_spread_limit = *spec.ratio_spread_limit;
    result = implicit_lipschitz_study(build_implicit_problem(cfg), opts);
  } else {
    ConvergenceOrderOptions opts;
    opts.solver = cfg.solver;
    if (spec.levels) opts.levels = *spec.levels;
    if (spec.seed) opts.seed = *spec.seed;
    const SweepProblem base = build_explicit_problem(cfg);
    // The scalar play deficit has an exact solution; use it as the oracle
    // whenever the problem is a play window.
    std::optional<PLPath> oracle;
    const bool play_bench = cfg.benchmark && *cfg.benchmark == "play-ramp";
    const bool play_family = cfg.family && cfg.family->name == "play";
    if (spec.use_oracle && (play_bench || play_family)) {
      const double rho = play_family ? cfg.family->rho : 1.0;
      const double x0 = play_family ? (*cfg.x0)(0) : 0.0;
      oracle = play_oracle(base.u, base.w, rho, x0);
    }
    result = convergence_order_study(base, oracle ? &*oracle : nullptr, opts);
  }

  write_study_outputs(cfg, result);
  std::cout << "study " << result.kind << " -> " << (result.pass ? "pass" : "FAIL");
  if (!result.detail.empty()) std::cout << " (" << result.detail << ")";
  std::cout << "\n";
  for (const auto& [name, value] : result.stats)
    std::cout << "  " << name << " = " << value << "\n";
  return result.pass ? 0 : 1;
}

int run(const RunConfig& cfg) {
  if (cfg.subcommand == "certify") return run_certify(cfg);
  if (cfg.subcommand == "solve") return run_solve(cfg);
  if (cfg.subcommand == "solve-implicit") return run_solve_implicit(cfg);
  return run_study(cfg);
}

}  // namespace sweep::cli
