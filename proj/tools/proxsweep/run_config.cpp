#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "sweep/errors.hpp"
#include "sweep/path_io.hpp"

namespace sweep::cli {
namespace {

using nlohmann::json;

struct Ctx {
  std::filesystem::path config_dir;
  std::vector<std::string> violations;

  void fail(const std::string& where, const std::string& msg) {
    violations.push_back(where.empty() ? msg : where + ": " + msg);
  }
};

void check_keys(Ctx& ctx, const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known) ctx.fail(where, "unknown key '" + it.key() + "'");
  }
}

bool expect_object(Ctx& ctx, const json& v, const std::string& where) {
  if (v.is_object()) return true;
  ctx.fail(where, "must be an object");
  return false;
}

bool get_number(Ctx& ctx, const json& obj, const std::string& where, const char* key,
                double& out) {
  if (!obj.contains(key)) return false;
  const json& v = obj.at(key);
  if (!v.is_number()) {
    ctx.fail(where, std::string("'") + key + "' must be a number");
    return false;
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    ctx.fail(where, std::string("'") + key + "' must be finite");
    return false;
  }
  out = x;
  return true;
}

bool get_positive(Ctx& ctx, const json& obj, const std::string& where, const char* key,
                  double& out) {
  double x = 0.0;
  if (!get_number(ctx, obj, where, key, x)) return false;
  if (!(x > 0.0)) {
    ctx.fail(where, std::string("'") + key + "' must be positive");
    return false;
  }
  out = x;
  return true;
}

bool get_int(Ctx& ctx, const json& obj, const std::string& where, const char* key,
             int min_value, int& out) {
  if (!obj.contains(key)) return false;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    ctx.fail(where, std::string("'") + key + "' must be an integer");
    return false;
  }
  const long long x = v.get<long long>();
  if (x < min_value) {
    ctx.fail(where, std::string("'") + key + "' must be >= " + std::to_string(min_value));
    return false;
  }
  out = static_cast<int>(x);
  return true;
}

bool get_seed(Ctx& ctx, const json& obj, const std::string& where, const char* key,
              std::uint64_t& out) {
  if (!obj.contains(key)) return false;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
    ctx.fail(where, std::string("'") + key + "' must be a non-negative integer");
    return false;
  }
  out = v.get<std::uint64_t>();
  return true;
}

bool get_bool(Ctx& ctx, const json& obj, const std::string& where, const char* key,
              bool& out) {
  if (!obj.contains(key)) return false;
  const json& v = obj.at(key);
  if (!v.is_boolean()) {
    ctx.fail(where, std::string("'") + key + "' must be a boolean");
    return false;
  }
  out = v.get<bool>();
  return true;
}

bool get_string(Ctx& ctx, const json& obj, const std::string& where, const char* key,
                std::string& out) {
  if (!obj.contains(key)) return false;
  const json& v = obj.at(key);
  if (!v.is_string()) {
    ctx.fail(where, std::string("'") + key + "' must be a string");
    return false;
  }
  out = v.get<std::string>();
  return true;
}

bool parse_number_list(Ctx& ctx, const json& v, const std::string& where,
                       std::vector<double>& out) {
  if (!v.is_array() || v.empty()) {
    ctx.fail(where, "must be a non-empty array of numbers");
    return false;
  }
  out.clear();
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) {
      ctx.fail(where, "entries must be finite numbers");
      return false;
    }
    out.push_back(e.get<double>());
  }
  return true;
}

bool parse_matrix(Ctx& ctx, const json& v, const std::string& where,
                  std::vector<std::vector<double>>& out) {
  if (!v.is_array() || v.empty()) {
    ctx.fail(where, "must be a non-empty array of rows");
    return false;
  }
  out.clear();
  std::size_t width = 0;
  for (const auto& row : v) {
    std::vector<double> r;
    if (!parse_number_list(ctx, row, where, r)) return false;
    if (width == 0) width = r.size();
    if (r.size() != width) {
      ctx.fail(where, "rows must have equal length");
      return false;
    }
    out.push_back(std::move(r));
  }
  return true;
}

std::optional<FamilySpec> parse_family(Ctx& ctx, const json& v) {
  const std::string where = "family";
  if (!expect_object(ctx, v, where)) return std::nullopt;
  FamilySpec spec;
  if (!get_string(ctx, v, where, "name", spec.name) || spec.name.empty()) {
    ctx.fail(where, "missing required key 'name'");
    return std::nullopt;
  }
  if (spec.name == "play") {
    check_keys(ctx, v, where, {"name", "rho"});
    get_positive(ctx, v, where, "rho", spec.rho);
  } else if (spec.name == "ball") {
    check_keys(ctx, v, where, {"name", "rho", "dim"});
    get_positive(ctx, v, where, "rho", spec.rho);
    get_int(ctx, v, where, "dim", 1, spec.dim);
  } else if (spec.name == "star") {
    check_keys(ctx, v, where, {"name", "R0", "a", "k"});
    get_positive(ctx, v, where, "R0", spec.R0);
    double a = spec.a;
    if (get_number(ctx, v, where, "a", a)) {
      if (a < 0.0 || a >= 1.0) {
        ctx.fail(where, "'a' must lie in [0, 1)");
      } else {
        spec.a = a;
      }
    }
    get_int(ctx, v, where, "k", 1, spec.k);
  } else {
    ctx.fail(where, "unknown family '" + spec.name + "' (expected play, ball or star)");
    return std::nullopt;
  }
  return spec;
}

std::optional<PathSpec> parse_path(Ctx& ctx, const json& v, const std::string& where) {
  if (!expect_object(ctx, v, where)) return std::nullopt;
  check_keys(ctx, v, where, {"nodes", "csv"});
  const bool has_nodes = v.contains("nodes");
  const bool has_csv = v.contains("csv");
  if (has_nodes && has_csv) {
    ctx.fail(where, "'nodes' and 'csv' are mutually exclusive");
    return std::nullopt;
  }
  if (!has_nodes && !has_csv) {
    ctx.fail(where, "needs 'nodes' or 'csv'");
    return std::nullopt;
  }
  PathSpec spec;
  if (has_csv) {
    std::string name;
    if (!get_string(ctx, v, where, "csv", name)) return std::nullopt;
    std::filesystem::path file(name);
    if (file.is_relative()) file = ctx.config_dir / file;
    try {
      spec.path = read_path_csv_file(file);
    } catch (const ConfigError& e) {
      ctx.fail(where, e.what());
      return std::nullopt;
    }
    spec.source = file.string();
    return spec;
  }
  std::vector<std::vector<double>> rows;
  if (!parse_matrix(ctx, v.at("nodes"), where + ".nodes", rows)) return std::nullopt;
  if (rows.size() < 2 || rows.front().size() < 2) {
    ctx.fail(where + ".nodes", "needs at least two rows of [t, v0, ...]");
    return std::nullopt;
  }
  std::vector<double> times;
  std::vector<Vec> values;
  const int dim = static_cast<int>(rows.front().size()) - 1;
  for (const auto& row : rows) {
    times.push_back(row.front());
    Vec val(dim);
    for (int j = 0; j < dim; ++j) val(j) = row[j + 1];
    values.push_back(std::move(val));
  }
  try {
    spec.path = PLPath(TimeGrid(std::move(times)), std::move(values));
  } catch (const ConfigError& e) {
    ctx.fail(where + ".nodes", e.what());
    return std::nullopt;
  }
  spec.source = "nodes";
  return spec;
}

void parse_projection(Ctx& ctx, const json& v, const std::string& where,
                      ProjectionOptions& out) {
  if (!expect_object(ctx, v, where)) return;
  check_keys(ctx, v, where,
             {"tol", "level_tol", "max_iter", "safety_factor", "scan_directions"});
  get_positive(ctx, v, where, "tol", out.tol);
  get_positive(ctx, v, where, "level_tol", out.level_tol);
  get_int(ctx, v, where, "max_iter", 1, out.max_iter);
  get_positive(ctx, v, where, "safety_factor", out.safety_factor);
  get_int(ctx, v, where, "scan_directions", 4, out.scan_directions);
}

void parse_solver(Ctx& ctx, const json& v, const std::string& where, SolveOptions& out) {
  if (!expect_object(ctx, v, where)) return;
  check_keys(ctx, v, where,
             {"scheme", "activation_tol", "vi_samples", "seed", "gate_fraction",
              "gate_use_sampled_rate", "record_compensator", "projection"});
  std::string scheme;
  if (get_string(ctx, v, where, "scheme", scheme)) {
    try {
      out.scheme = parse_scheme(scheme);
    } catch (const ConfigError& e) {
      ctx.fail(where, e.what());
    }
  }
  get_positive(ctx, v, where, "activation_tol", out.activation_tol);
  get_int(ctx, v, where, "vi_samples", 0, out.vi_samples);
  get_seed(ctx, v, where, "seed", out.seed);
  get_positive(ctx, v, where, "gate_fraction", out.gate_fraction);
  get_bool(ctx, v, where, "gate_use_sampled_rate", out.gate_use_sampled_rate);
  get_bool(ctx, v, where, "record_compensator", out.record_compensator);
  if (v.contains("projection")) parse_projection(ctx, v.at("projection"), where + ".projection", out.projection);
}

void parse_certify(Ctx& ctx, const json& v, CertifyOptions& out) {
  const std::string where = "certify";
  if (!expect_object(ctx, v, where)) return;
  check_keys(ctx, v, where,
             {"n_boundary", "n_pairs", "n_box", "n_params", "seed", "lambda_floor",
              "floor_safety", "lipschitz_safety", "tube_level", "constant_floor",
              "coercivity_rhos", "w_lo", "w_hi", "w_samples"});
  get_int(ctx, v, where, "n_boundary", 1, out.n_boundary);
  get_int(ctx, v, where, "n_pairs", 1, out.n_pairs);
  get_int(ctx, v, where, "n_box", 1, out.n_box);
  get_int(ctx, v, where, "n_params", 1, out.n_params);
  get_seed(ctx, v, where, "seed", out.seed);
  get_positive(ctx, v, where, "lambda_floor", out.lambda_floor);
  get_positive(ctx, v, where, "floor_safety", out.floor_safety);
  get_positive(ctx, v, where, "lipschitz_safety", out.lipschitz_safety);
  get_positive(ctx, v, where, "tube_level", out.tube_level);
  get_positive(ctx, v, where, "constant_floor", out.constant_floor);
  if (v.contains("coercivity_rhos"))
    parse_number_list(ctx, v.at("coercivity_rhos"), where + ".coercivity_rhos",
                      out.coercivity_rhos);
  if (v.contains("w_lo")) parse_number_list(ctx, v.at("w_lo"), where + ".w_lo", out.w_lo);
  if (v.contains("w_hi")) parse_number_list(ctx, v.at("w_hi"), where + ".w_hi", out.w_hi);
  if (v.contains("w_samples")) {
    std::vector<std::vector<double>> rows;
    if (parse_matrix(ctx, v.at("w_samples"), where + ".w_samples", rows)) {
      out.w_samples.clear();
      for (const auto& row : rows) {
        Vec w(static_cast<int>(row.size()));
        for (std::size_t j = 0; j < row.size(); ++j) w(static_cast<int>(j)) = row[j];
        out.w_samples.push_back(std::move(w));
      }
    }
  }
  if ((out.w_lo.empty()) != (out.w_hi.empty()))
    ctx.fail(where, "'w_lo' and 'w_hi' must be given together");
  if (!out.w_lo.empty() && out.w_lo.size() != out.w_hi.size())
    ctx.fail(where, "'w_lo' and 'w_hi' must have equal length");
}

void parse_picard(Ctx& ctx, const json& v, PicardOptions& out) {
  const std::string where = "picard";
  if (!expect_object(ctx, v, where)) return;
  check_keys(ctx, v, where, {"tol", "max_iter", "ratio_tol", "envelope_tol_scale", "inner"});
  get_positive(ctx, v, where, "tol", out.tol);
  get_int(ctx, v, where, "max_iter", 1, out.max_iter);
  get_positive(ctx, v, where, "ratio_tol", out.ratio_tol);
  get_positive(ctx, v, where, "envelope_tol_scale", out.envelope_tol_scale);
  if (v.contains("inner")) parse_solver(ctx, v.at("inner"), where + ".inner", out.inner);
}

std::optional<StateMapSpec> parse_state_map(Ctx& ctx, const json& v) {
  const std::string where = "state_map";
  if (!expect_object(ctx, v, where)) return std::nullopt;
  check_keys(ctx, v, where, {"kind", "w_base", "Gamma", "Omega", "beta"});
  StateMapSpec spec;
  get_string(ctx, v, where, "kind", spec.kind);
  if (spec.kind != "linear" && spec.kind != "tanh") {
    ctx.fail(where, "'kind' must be 'linear' or 'tanh'");
    return std::nullopt;
  }
  if (!v.contains("w_base")) {
    ctx.fail(where, "missing required key 'w_base' (path object or \"zero\")");
  } else if (v.at("w_base").is_string()) {
    if (v.at("w_base").get<std::string>() != "zero") {
      ctx.fail(where, "'w_base' string form must be \"zero\"");
    } else {
      spec.w_base_zero = true;
    }
  } else {
    spec.w_base = parse_path(ctx, v.at("w_base"), where + ".w_base");
  }
  if (!v.contains("Gamma")) {
    ctx.fail(where, "missing required key 'Gamma'");
  } else {
    parse_matrix(ctx, v.at("Gamma"), where + ".Gamma", spec.Gamma);
  }
  if (v.contains("Omega")) {
    if (spec.kind == "tanh") ctx.fail(where, "'Omega' only applies to the linear kind");
    parse_matrix(ctx, v.at("Omega"), where + ".Omega", spec.Omega);
  }
  if (v.contains("beta")) {
    if (spec.kind != "tanh") ctx.fail(where, "'beta' only applies to the tanh kind");
    get_positive(ctx, v, where, "beta", spec.beta);
  }
  return spec;
}

std::optional<StudySpec> parse_study_options(Ctx& ctx, const json& v) {
  const std::string where = "study";
  if (!expect_object(ctx, v, where)) return std::nullopt;
  check_keys(ctx, v, where,
             {"scales", "seed", "segments", "perturb_w", "floor_multiplier",
              "ratio_spread_limit", "levels", "shrink_requirement", "use_oracle"});
  StudySpec spec;
  if (v.contains("scales")) {
    std::vector<double> scales;
    if (parse_number_list(ctx, v.at("scales"), where + ".scales", scales)) {
      for (double s : scales)
        if (!(s > 0.0)) ctx.fail(where + ".scales", "entries must be positive");
      spec.scales = std::move(scales);
    }
  }
  std::uint64_t seed = 0;
  if (get_seed(ctx, v, where, "seed", seed)) spec.seed = seed;
  int iv = 0;
  if (get_int(ctx, v, where, "segments", 1, iv)) spec.segments = iv;
  bool bv = false;
  if (get_bool(ctx, v, where, "perturb_w", bv)) spec.perturb_w = bv;
  double dv = 0.0;
  if (get_positive(ctx, v, where, "floor_multiplier", dv)) spec.floor_multiplier = dv;
  if (get_positive(ctx, v, where, "ratio_spread_limit", dv)) spec.ratio_spread_limit = dv;
  if (get_int(ctx, v, where, "levels", 2, iv)) spec.levels = iv;
  if (get_positive(ctx, v, where, "shrink_requirement", dv)) spec.shrink_requirement = dv;
  get_bool(ctx, v, where, "use_oracle", spec.use_oracle);
  return spec;
}

const std::vector<std::string> kExplicitBenchmarks = {"play-ramp", "dragging-ball",
                                                      "star-drag"};

bool is_explicit_benchmark(const std::string& name) {
  return std::find(kExplicitBenchmarks.begin(), kExplicitBenchmarks.end(), name) !=
         kExplicitBenchmarks.end();
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "catchup") return Scheme::catching_up;
  if (name == "boundary-ode") return Scheme::boundary_ode;
  throw ConfigError("unknown scheme '" + name + "' (expected catchup or boundary-ode)");
}

RunConfig parse_config(const std::string& text, const std::string& subcommand,
                       const std::filesystem::path& config_dir,
                       const CliOverrides& overrides) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }

  Ctx ctx;
  ctx.config_dir = config_dir;
  RunConfig cfg;
  cfg.subcommand = subcommand;

  if (!root.is_object()) throw ConfigError("config: top level must be an object");

  if (subcommand == "certify") {
    check_keys(ctx, root, "config", {"out", "seed", "family", "certify"});
  } else if (subcommand == "solve") {
    check_keys(ctx, root, "config",
               {"out", "seed", "benchmark", "grid_n", "family", "certify", "u", "w",
                "x0", "solver"});
  } else if (subcommand == "solve-implicit") {
    check_keys(ctx, root, "config",
               {"out", "seed", "benchmark", "grid_n", "delta", "epsilon", "family",
                "certify", "u", "x0", "state_map", "picard"});
  } else if (subcommand == "study") {
    check_keys(ctx, root, "config",
               {"out", "seed", "kind", "benchmark", "grid_n", "delta", "epsilon",
                "family", "certify", "u", "w", "x0", "solver", "state_map", "picard",
                "study"});
  } else {
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  }

  std::string out_name;
  if (get_string(ctx, root, "config", "out", out_name)) cfg.out_dir = out_name;

  std::uint64_t master_seed = 0;
  const bool has_master_seed = get_seed(ctx, root, "config", "seed", master_seed);

  std::string bench;
  if (get_string(ctx, root, "config", "benchmark", bench)) cfg.benchmark = bench;

  int grid_n = 0;
  if (get_int(ctx, root, "config", "grid_n", 1, grid_n))
    cfg.grid_n = static_cast<std::size_t>(grid_n);

  get_positive(ctx, root, "config", "delta", cfg.delta);
  get_positive(ctx, root, "config", "epsilon", cfg.epsilon);

  if (root.contains("family")) cfg.family = parse_family(ctx, root.at("family"));
  if (root.contains("u")) cfg.u = parse_path(ctx, root.at("u"), "u");
  if (root.contains("w")) cfg.w = parse_path(ctx, root.at("w"), "w");
  if (root.contains("x0")) {
    std::vector<double> x0;
    if (parse_number_list(ctx, root.at("x0"), "x0", x0)) {
      Vec v(static_cast<int>(x0.size()));
      for (std::size_t j = 0; j < x0.size(); ++j) v(static_cast<int>(j)) = x0[j];
      cfg.x0 = std::move(v);
    }
  }
  if (root.contains("certify")) {
    CertifyOptions opts;
    parse_certify(ctx, root.at("certify"), opts);
    cfg.certify = std::move(opts);
  }
  if (root.contains("solver")) parse_solver(ctx, root.at("solver"), "solver", cfg.solver);
  if (root.contains("state_map")) cfg.state_map = parse_state_map(ctx, root.at("state_map"));
  if (root.contains("picard")) parse_picard(ctx, root.at("picard"), cfg.picard);
  if (root.contains("study")) cfg.study = parse_study_options(ctx, root.at("study"));
  std::string kind;
  if (get_string(ctx, root, "config", "kind", kind)) {
    if (!cfg.study) cfg.study = StudySpec{};
    cfg.study->kind = kind;
  }
  if (overrides.study_kind) {
    if (!cfg.study) cfg.study = StudySpec{};
    cfg.study->kind = *overrides.study_kind;
  }

  if (has_master_seed) {
    // The master seed feeds every stage that did not pin its own.
    if (!root.contains("solver") || !root.at("solver").contains("seed"))
      cfg.solver.seed = master_seed;
    if (cfg.certify && !root.at("certify").contains("seed"))
      cfg.certify->seed = master_seed;
    if (!root.contains("picard") || !root.at("picard").is_object() ||
        !root.at("picard").contains("inner") || !root.at("picard").at("inner").contains("seed"))
      cfg.picard.inner.seed = master_seed;
    if (cfg.study && !cfg.study->seed &&
        (!root.contains("study") || !root.at("study").contains("seed")))
      cfg.study->seed = master_seed;
  }

  // Cross-field requirements per subcommand.  Presence tests look at the
  // JSON itself: a field that was supplied but malformed already produced
  // its own violation and must not also count as missing.
  const bool has_family = root.contains("family");
  const bool has_bench = root.contains("benchmark");
  auto require = [&](const char* key) {
    if (!root.contains(key))
      ctx.fail("config", std::string("missing required field '") + key + "'");
  };
  auto require_one_source = [&] {
    if (has_family == has_bench)
      ctx.fail("config", "exactly one of 'benchmark' and 'family' is required");
  };
  auto require_star_certified = [&] {
    if (cfg.family && cfg.family->name == "star" && !root.contains("certify"))
      ctx.fail("config",
               "family 'star' has no closed-form constants; add a 'certify' block");
  };
  auto require_explicit_problem = [&] {
    require_one_source();
    if (has_bench && cfg.benchmark && !is_explicit_benchmark(*cfg.benchmark))
      ctx.fail("config", "unknown benchmark '" + *cfg.benchmark +
                             "' (expected play-ramp, dragging-ball or star-drag)");
    if (has_family) {
      require("u");
      require("w");
      require("x0");
      require_star_certified();
    }
  };
  auto require_implicit_problem = [&] {
    require_one_source();
    if (has_bench && cfg.benchmark && *cfg.benchmark != "implicit-play")
      ctx.fail("config",
               "unknown benchmark '" + *cfg.benchmark + "' (expected implicit-play)");
    if (has_family) {
      require("u");
      require("x0");
      require("state_map");
      require_star_certified();
    }
  };

  if (subcommand == "certify") {
    require("family");
  } else if (subcommand == "solve") {
    require_explicit_problem();
  } else if (subcommand == "solve-implicit") {
    require_implicit_problem();
  } else if (subcommand == "study") {
    if (!cfg.study || cfg.study->kind.empty()) {
      ctx.fail("config", "missing study kind (config key 'kind' or flag --kind)");
    } else {
      const std::string& k = cfg.study->kind;
      if (k != "continuity" && k != "lipschitz" && k != "implicit" && k != "order") {
        ctx.fail("config", "unknown study kind '" + k +
                               "' (expected continuity, lipschitz, implicit or order)");
      } else if (k == "implicit") {
        require_implicit_problem();
      } else {
        require_explicit_problem();
      }
    }
  }

  if (cfg.u && cfg.w && cfg.u->path.grid().t_end() != cfg.w->path.grid().t_end())
    ctx.fail("config", "'u' and 'w' must share one time horizon");

  if (!ctx.violations.empty()) {
    std::ostringstream msg;
    msg << "config validation failed:";
    for (const auto& v : ctx.violations) msg << "\n  - " << v;
    throw ConfigError(msg.str());
  }

  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  if (overrides.grid_n) cfg.grid_n = static_cast<std::size_t>(*overrides.grid_n);
  if (overrides.scheme) cfg.solver.scheme = parse_scheme(*overrides.scheme);
  if (overrides.seed) {
    cfg.solver.seed = *overrides.seed;
    cfg.picard.inner.seed = *overrides.seed;
    if (cfg.certify) cfg.certify->seed = *overrides.seed;
    if (cfg.study) cfg.study->seed = *overrides.seed;
  }
  return cfg;
}

}  // namespace sweep::cli
