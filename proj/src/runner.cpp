#include "polyfix/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "polyfix/dynamics.hpp"
#include "polyfix/numerics.hpp"
#include "polyfix/parallel.hpp"
#include "polyfix/report.hpp"
#include "polyfix/rng.hpp"
#include "polyfix/structure.hpp"

namespace polyfix {

namespace {

constexpr int kCertifyTrials = 2000;

struct BuiltRun {
  PolyhedralNorm norm;
  MapSpec map;
};

BuiltRun build_run(const ExperimentConfig& config) {
  PolyhedralNorm norm = norm_from_spec(config.norm_spec);
  if (norm.kind() == NormKind::Custom) {
    NormValidation v = norm.validate();
    if (!v.symmetric || !v.spanning) {
      std::string what = "custom norm rejected:";
      for (const std::string& s : v.violations) what += " " + s + ";";
      throw config_error(what);
    }
  }
  MapSpec map = map_from_spec(config.map_spec);
  if (map.dim_in() != norm.ambient_dim()) {
    throw dimension_mismatch("map acts on dimension " + std::to_string(map.dim_in()) +
                             " but the norm lives on dimension " +
                             std::to_string(norm.ambient_dim()));
  }
  return BuiltRun{std::move(norm), std::move(map)};
}

LipschitzCertificate certify(const BuiltRun& run, const ExperimentConfig& config) {
  SamplingDomain domain;
  domain.radius = config.box_radius;
  return certify_nonexpansive(run.map, run.norm, kCertifyTrials, config.seed, domain,
                              config.tolerances.check_tol);
}

StructurePipelineParams pipeline_params(const ExperimentConfig& config) {
  StructurePipelineParams p;
  p.starts = config.starts;
  p.seed = config.seed;
  p.fp_tol = config.tolerances.fp_tol;
  p.face_tol = config.tolerances.face_tol;
  p.check_tol = config.tolerances.check_tol;
  p.max_iter = config.caps.max_iter;
  p.retry_budget = config.caps.retry_budget;
  p.box_radius = config.box_radius;
  return p;
}

MapFn iterate_fn(const MapFn& f, long times) {
  return [f, times](const Vector& x) {
    Vector y = x;
    for (long k = 0; k < times; ++k) y = f(y);
    return y;
  };
}

// Per-start orbit search. Failures are recorded, not fatal; the command
// fails only when every start fails.
struct StartOrbit {
  bool ok = false;
  Orbit orbit;
  std::string error_code;
  std::string message;
};

std::vector<StartOrbit> orbits_from_starts(const MapFn& f, const PolyhedralNorm& norm,
                                           const ExperimentConfig& config) {
  const int n = norm.ambient_dim();
  OrbitOptions opts;
  opts.orbit_tol = config.tolerances.orbit_tol;
  opts.fp_tol = config.tolerances.fp_tol;
  opts.max_iter = config.caps.max_iter;
  opts.p_max = config.caps.p_max;

  std::vector<StartOrbit> out(config.starts);
  parallel_for(static_cast<std::size_t>(config.starts), [&](std::size_t i) {
    Rng rng(Rng::derive(config.seed, 0x0b17 + i));
    const Vector x0 = rng.uniform_box(n, config.box_radius);
    try {
      out[i].orbit = find_orbit(f, x0, norm, opts);
      out[i].ok = true;
    } catch (const Error& e) {
      out[i].error_code = e.code();
      out[i].message = e.what();
    }
  });
  return out;
}

Json starts_json(const std::vector<StartOrbit>& starts) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    Json row;
    row["start"] = i;
    if (starts[i].ok) {
      row["orbit"] = to_json(starts[i].orbit);
    } else {
      row["error"] = starts[i].error_code;
      row["message"] = starts[i].message;
    }
    arr.push_back(std::move(row));
  }
  return arr;
}

// Theorem-audit alarms fire only for the built-in norm families; a custom
// polyhedral norm is outside the guaranteed hypotheses, so its verdicts are
// recorded without raising the exit code.
bool audit_alarms(const BoundAudit& audit, const ExperimentConfig& config) {
  if (!config.builtin_norm()) return false;
  return !audit.divides_q || !audit.permutation_order_form || !audit.below_2n ||
         !audit.below_best_known;
}

void attach_linearization(Json& report, int& exit_code, const MapFn& f,
                          const MapFn& fix_of, long q, const PolyhedralNorm& norm,
                          const ExperimentConfig& config) {
  Json block;
  try {
    StructurePipelineParams params = pipeline_params(config);
    StructureReport sr = run_structure_pipeline(fix_of, norm, params);
    block["structure_of_iterate"] = to_json(sr);
    Linearization lin = linearize_on_fix(f, fix_of, norm, sr.a, sr.w, 50,
                                         Rng::derive(config.seed, 0x11f0),
                                         config.tolerances.fp_tol,
                                         config.tolerances.check_tol,
                                         config.caps.max_iter);
    block["linearization"] = to_json(lin);
    const int cap = static_cast<int>(std::max<long>(q, 1));
    const int period = linear_period(lin.on_w, cap, config.tolerances.check_tol);
    block["linear_period"] = period;
    // The q-fold iterate is the identity on its own fixed set, so the
    // linear part must hit the identity within the cap.
    const bool period_ok = period >= 1 && q % period == 0;
    block["period_divides_q"] = period_ok;
    if (!period_ok && config.builtin_norm()) exit_code = std::max(exit_code, 3);
  } catch (const Error& e) {
    block["error"] = e.code();
    block["message"] = e.what();
    exit_code = std::max(exit_code, exit_code_for(e));
  }
  report["linearize"] = std::move(block);
}

bool structure_alarms(const StructureReport& r, double check_tol) {
  return r.a2_defect > check_tol || !r.projection_nonexpansive ||
         r.isometry.max_defect > check_tol || r.isometry.inverse_defect > check_tol ||
         r.value_preservation > check_tol;
}

std::vector<DualFace> faces_of(const std::vector<LockedSet>& sets) {
  std::vector<DualFace> faces;
  faces.reserve(sets.size());
  for (const LockedSet& s : sets) faces.push_back(s.face);
  std::sort(faces.begin(), faces.end());
  return faces;
}

Json faces_json(const std::vector<DualFace>& faces) {
  Json arr = Json::array();
  for (const DualFace& f : faces) arr.push_back(to_json(f));
  return arr;
}

// Norm-specific projection construction onto V plus its audits. A
// STRUCTURE-MISMATCH here means V does not take the shape the theory gives
// agreement subspaces under the built-in norm, which points at
// under-discovered locked faces.
void attach_projection_construction(Json& report, int& exit_code,
                                    const StructureReport& sr,
                                    const PolyhedralNorm& norm,
                                    const ExperimentConfig& config) {
  if (norm.kind() == NormKind::Custom) return;
  Json block;
  try {
    Matrix p;
    if (norm.kind() == NormKind::LInf) {
      block["construction"] = "sign-pattern averaging";
      p = projection_linf(sr.v);
    } else {
      block["construction"] = "coordinate restriction";
      const std::vector<int> support = support_of_v(sr.v, norm);
      block["support"] = support;
      p = projection_l1(support, norm.ambient_dim());
    }
    block["matrix"] = to_json(p);
    ProjectionCheck check = verify_projection(p, norm, config.tolerances.check_tol);
    block["a2_defect"] = check.a2_defect;
    block["opnorm"] = check.opnorm_estimate;
    block["opnorm_exact"] = check.exact_norm;
    block["nonexpansive"] = check.nonexpansive;
    if (check.a2_defect > config.tolerances.check_tol || !check.nonexpansive) {
      exit_code = std::max(exit_code, 3);
    }
  } catch (const Error& e) {
    block["error"] = e.code();
    block["message"] = e.what();
    exit_code = std::max(exit_code, exit_code_for(e));
  }
  report["projection_construction"] = std::move(block);
}

void attach_oracle(Json& report, int& exit_code, const MapFn& f,
                   const StructureReport& sr, const PolyhedralNorm& norm,
                   const ExperimentConfig& config) {
  Json block;
  if (norm.kind() != NormKind::LInf || norm.ambient_dim() > 3) {
    block["skipped"] = "oracle covers the sup norm in dimension <= 3";
    report["oracle"] = std::move(block);
    return;
  }
  try {
    OracleOptions opts;
    opts.lo = -config.box_radius;
    opts.hi = config.box_radius;
    opts.face_tol = config.tolerances.face_tol;
    OracleResult oracle = oracle_locked_faces_linf(f, norm.ambient_dim(), opts);
    std::sort(oracle.minimal.begin(), oracle.minimal.end());
    const std::vector<DualFace> found = faces_of(sr.minimal);
    block["minimal_faces"] = faces_json(oracle.minimal);
    block["pipeline_minimal_faces"] = faces_json(found);
    const bool match = oracle.minimal == found;
    block["match"] = match;
    if (!match) exit_code = std::max(exit_code, 3);
  } catch (const Error& e) {
    block["error"] = e.code();
    block["message"] = e.what();
    exit_code = std::max(exit_code, exit_code_for(e));
  }
  report["oracle"] = std::move(block);
}

std::string status_for(int exit_code) {
  switch (exit_code) {
    case 0: return "ok";
    case 2: return "certification-fail";
    case 3: return "theorem-audit-alarm";
    case 4: return "precondition-unmet";
    default: return "config-error";
  }
}

double csv_number(const Json& j, std::initializer_list<const char*> path) {
  const Json* cur = &j;
  for (const char* key : path) {
    if (!cur->contains(key)) return -1.0;
    cur = &(*cur)[key];
  }
  return cur->is_number() ? cur->get<double>() : -1.0;
}

}  // namespace

int exit_code_for(const Error& e) {
  const std::string code = e.code();
  if (code == "PRECONDITION-UNMET" || code == "NO-ORBIT-FOUND" ||
      code == "AMBIGUOUS-PERIOD") {
    return 4;
  }
  if (code == "LINEARITY-VIOLATION" || code == "CONTAINMENT-VIOLATION" ||
      code == "STRUCTURE-MISMATCH" || code == "NO-DIFFERENTIABLE-POINT-FOUND") {
    return 3;
  }
  return 1;
}

RunOutcome run_certify(const ExperimentConfig& config) {
  RunOutcome out;
  out.report = report_shell("certify", config);
  BuiltRun run = build_run(config);
  LipschitzCertificate cert = certify(run, config);
  out.report["certificate"] = to_json(cert);
  out.exit_code = cert.pass ? 0 : 2;
  out.report["status"] = status_for(out.exit_code);
  return out;
}

RunOutcome run_fix(const ExperimentConfig& config) {
  RunOutcome out;
  out.report = report_shell("fix", config);
  BuiltRun run = build_run(config);
  LipschitzCertificate cert = certify(run, config);
  out.report["certificate"] = to_json(cert);
  if (!cert.pass) {
    out.exit_code = 2;
    out.report["status"] = status_for(out.exit_code);
    return out;
  }
  Harvest harvest =
      harvest_fixed_points(run.map.fn(), run.norm, config.starts, config.seed,
                           config.tolerances.fp_tol, config.caps.max_iter,
                           config.box_radius);
  Json runs = Json::array();
  for (const FixedPointResult& r : harvest.runs) runs.push_back(to_json(r));
  out.report["starts"] = config.starts;
  out.report["converged"] = static_cast<int>(harvest.converged.size());
  out.report["runs"] = std::move(runs);
  out.exit_code = harvest.converged.empty() ? 4 : 0;
  out.report["status"] = status_for(out.exit_code);
  return out;
}

RunOutcome run_orbit(const ExperimentConfig& config) {
  RunOutcome out;
  out.report = report_shell("orbit", config);
  BuiltRun run = build_run(config);
  LipschitzCertificate cert = certify(run, config);
  out.report["certificate"] = to_json(cert);
  if (!cert.pass) {
    out.exit_code = 2;
    out.report["status"] = status_for(out.exit_code);
    return out;
  }

  const MapFn f = run.map.fn();
  const std::vector<StartOrbit> starts = orbits_from_starts(f, run.norm, config);
  out.report["starts"] = starts_json(starts);

  std::vector<Orbit> orbits;
  std::vector<int> periods;
  for (const StartOrbit& s : starts) {
    if (!s.ok) continue;
    orbits.push_back(s.orbit);
    periods.push_back(s.orbit.minimal_period);
  }
  out.report["orbits_found"] = static_cast<int>(orbits.size());
  if (orbits.empty()) {
    out.exit_code = 4;
    out.report["status"] = status_for(out.exit_code);
    return out;
  }

  const long q = lcm_of_observed_periods(orbits);
  const BoundAudit audit =
      audit_period(q, run.norm.ambient_dim(), config.p_norm(), periods);
  out.report["q"] = q;
  out.report["audit"] = to_json(audit);
  if (audit_alarms(audit, config)) out.exit_code = 3;

  if (config.linearize) {
    attach_linearization(out.report, out.exit_code, f, iterate_fn(f, q), q, run.norm,
                         config);
  }
  out.report["status"] = status_for(out.exit_code);
  return out;
}

RunOutcome run_structure(const ExperimentConfig& config, bool oracle) {
  RunOutcome out;
  out.report = report_shell("structure", config);
  BuiltRun run = build_run(config);
  LipschitzCertificate cert = certify(run, config);
  out.report["certificate"] = to_json(cert);
  if (!cert.pass) {
    out.exit_code = 2;
    out.report["status"] = status_for(out.exit_code);
    return out;
  }

  const MapFn f = run.map.fn();
  StructureReport sr = run_structure_pipeline(f, run.norm, pipeline_params(config));
  out.report["structure"] = to_json(sr);
  if (structure_alarms(sr, config.tolerances.check_tol)) out.exit_code = 3;

  attach_projection_construction(out.report, out.exit_code, sr, run.norm, config);
  if (oracle) attach_oracle(out.report, out.exit_code, f, sr, run.norm, config);
  if (config.linearize) {
    attach_linearization(out.report, out.exit_code, f, f, 1, run.norm, config);
  }
  out.report["status"] = status_for(out.exit_code);
  return out;
}

RunOutcome run_suite(const std::string& config_dir, const std::string& out_dir,
                     bool oracle, std::optional<std::uint64_t> seed_override,
                     std::optional<int> starts_override) {
  namespace fs = std::filesystem;
  RunOutcome out;
  out.report["schema"] = "polyfix-report-v1";
  out.report["command"] = "suite";
  out.report["config_dir"] = config_dir;

  std::vector<fs::path> paths;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(config_dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      paths.push_back(entry.path());
    }
  }
  if (ec) throw config_error("cannot read config directory: " + config_dir);
  if (paths.empty()) throw config_error("no *.json configs in: " + config_dir);
  std::sort(paths.begin(), paths.end());

  if (!out_dir.empty()) {
    fs::create_directories(out_dir, ec);
    if (ec) throw config_error("cannot create output directory: " + out_dir);
  }

  std::string csv =
      "name,norm,n,map,certified,q,permutation_order_form,below_2n,divides_q,"
      "dim_v,dim_w,a2_defect,isometry_defect,value_defect,status,exit\n";
  Json runs = Json::array();
  int worst = 0;

  for (const fs::path& path : paths) {
    Json run_report;
    int exit_code = 0;
    std::string name = path.stem().string();
    std::string norm_kind = "-", map_kind = "-";
    int n = 0;

    try {
      ExperimentConfig config = load_config(path.string());
      if (seed_override) config.seed = *seed_override;
      if (starts_override) config.starts = *starts_override;
      name = config.name;
      norm_kind = config.norm_spec.value("kind", "-");
      map_kind = config.map_spec.value("kind", "-");
      run_report = report_shell("suite-run", config);

      BuiltRun built = build_run(config);
      n = built.norm.ambient_dim();
      LipschitzCertificate cert = certify(built, config);
      run_report["certificate"] = to_json(cert);
      if (!cert.pass) {
        exit_code = 2;
      } else {
        RunOutcome orbit_out = run_orbit(config);
        run_report["orbit"] = orbit_out.report;
        RunOutcome structure_out = run_structure(config, oracle);
        run_report["structure"] = structure_out.report;
        exit_code = std::max(orbit_out.exit_code, structure_out.exit_code);
      }
    } catch (const Error& e) {
      run_report["error"] = e.code();
      run_report["message"] = e.what();
      exit_code = std::max(exit_code, exit_code_for(e));
    }
    run_report["exit"] = exit_code;
    run_report["status"] = status_for(exit_code);
    worst = std::max(worst, exit_code);

    const Json& orbit = run_report.contains("orbit") ? run_report["orbit"] : Json();
    const Json& structure =
        run_report.contains("structure") ? run_report["structure"] : Json();
    char defects[128];
    std::snprintf(defects, sizeof(defects), "%.3e,%.3e,%.3e",
                  csv_number(structure, {"structure", "projection", "a2_defect"}),
                  csv_number(structure, {"structure", "isometry", "max_defect"}),
                  csv_number(structure, {"structure", "value_preservation_defect"}));
    const bool certified =
        run_report.contains("certificate") && run_report["certificate"]["pass"].get<bool>();
    const long q = orbit.contains("q") ? orbit["q"].get<long>() : 0;
    auto audit_flag = [&](const char* key) {
      return orbit.contains("audit") ? (orbit["audit"][key].get<bool>() ? "true" : "false")
                                     : "-";
    };
    const int dim_v =
        structure.contains("structure") ? structure["structure"]["v"]["dim"].get<int>() : -1;
    const int dim_w =
        structure.contains("structure") ? structure["structure"]["w"]["dim"].get<int>() : -1;
    csv += name + "," + norm_kind + "," + std::to_string(n) + "," + map_kind + "," +
           (certified ? "true" : "false") + "," + std::to_string(q) + "," +
           audit_flag("permutation_order_form") + "," + audit_flag("below_2n") + "," +
           audit_flag("divides_q") + "," + std::to_string(dim_v) + "," +
           std::to_string(dim_w) + "," + defects + "," + run_report["status"].get<std::string>() +
           "," + std::to_string(exit_code) + "\n";

    if (!out_dir.empty()) {
      write_json_file(run_report, (fs::path(out_dir) / (path.stem().string() + ".json")).string());
    }
    Json summary;
    summary["name"] = name;
    summary["config"] = path.filename().string();
    summary["exit"] = exit_code;
    summary["status"] = run_report["status"];
    runs.push_back(std::move(summary));
  }

  if (!out_dir.empty()) {
    std::ofstream csv_out(fs::path(out_dir) / "summary.csv");
    if (!csv_out) throw config_error("cannot write summary.csv in: " + out_dir);
    csv_out << csv;
  }
  out.report["runs"] = std::move(runs);
  out.report["csv"] = csv;
  out.exit_code = worst;
  out.report["status"] = status_for(worst);
  return out;
}

RunOutcome run_landau(int max_n) {
  if (max_n < 1 || max_n > 20) {
    throw out_of_range("landau table: 1 <= n <= 20 required");
  }
  RunOutcome out;
  out.report["schema"] = "polyfix-report-v1";
  out.report["command"] = "landau";
  Json table = Json::array();
  for (int n = 1; n <= max_n; ++n) {
    Json row;
    row["n"] = n;
    row["landau"] = landau(n);
    row["lcm_set"] = partitions_lcm_set(n);
    table.push_back(std::move(row));
  }
  out.report["table"] = std::move(table);
  return out;
}

}  // namespace polyfix
