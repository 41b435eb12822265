#include <cstdio>
#include <string>

#include "json.hpp"
#include "sweep/certify.hpp"
#include "sweep/experiments.hpp"

namespace sweep {

namespace {

using ordered_json = nlohmann::ordered_json;

// Bump when the layout of emitted reports changes.
constexpr int kSchemaVersion = 1;

ordered_json bundle_to_json(const ConstantsBundle& cb) {
  ordered_json j;
  j["c"] = cb.c;
  j["lambda"] = cb.lambda;
  j["r"] = cb.r;
  j["L"] = cb.L;
  j["K0"] = cb.K0;
  j["K1"] = cb.K1;
  j["C0"] = cb.C0;
  j["C1"] = cb.C1;
  if (cb.coercivity_kappa)
    j["coercivity_kappa"] = *cb.coercivity_kappa;
  else
    j["coercivity_kappa"] = nullptr;
  return j;
}

}  // namespace

std::string certification_report_json(const CertificationReport& report) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "certification";
  j["family"] = report.family;
  j["all_pass"] = report.all_pass;
  j["constants"] = bundle_to_json(report.constants);
  ordered_json clauses = ordered_json::array();
  for (const auto& cl : report.clauses) {
    ordered_json c;
    c["name"] = cl.name;
    c["pass"] = cl.pass;
    c["estimate"] = cl.estimate;
    c["worst"] = cl.worst;
    c["witness"] = cl.witness;
    c["samples"] = cl.samples;
    clauses.push_back(c);
  }
  j["clauses"] = clauses;
  ordered_json o;
  o["seed"] = report.options.seed;
  o["n_boundary"] = report.options.n_boundary;
  o["n_pairs"] = report.options.n_pairs;
  o["n_box"] = report.options.n_box;
  o["n_params"] = report.options.n_params;
  o["tube_level"] = report.options.tube_level;
  o["floor_safety"] = report.options.floor_safety;
  o["lipschitz_safety"] = report.options.lipschitz_safety;
  o["lambda_floor"] = report.options.lambda_floor;
  o["coercivity_rhos"] = report.options.coercivity_rhos;
  o["w_lo"] = report.options.w_lo;
  o["w_hi"] = report.options.w_hi;
  j["options"] = o;
  return j.dump(2) + "\n";
}

std::string study_csv(const StudyResult& result) {
  std::string out;
  for (std::size_t i = 0; i < result.columns.size(); ++i) {
    if (i) out += ',';
    out += result.columns[i];
  }
  out += '\n';
  char buf[32];
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string study_json(const StudyResult& result) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = result.kind;
  j["pass"] = result.pass;
  j["detail"] = result.detail;
  j["columns"] = result.columns;
  j["rows"] = result.rows;
  ordered_json stats;
  for (const auto& [key, value] : result.stats) stats[key] = value;
  j["stats"] = stats;
  return j.dump(2) + "\n";
}

}  // namespace sweep
