#include "polyfix/report.hpp"

#include <fstream>

#include "polyfix/errors.hpp"

namespace polyfix {

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Subspace& s) {
  Json j;
  j["ambient"] = s.ambient();
  j["dim"] = s.dim();
  Json cols = Json::array();
  for (int c = 0; c < s.dim(); ++c) cols.push_back(to_json(Vector(s.basis.col(c))));
  j["basis_columns"] = std::move(cols);
  return j;
}

Json to_json(const DualFace& face) { return Json(face.indices); }

Json to_json(const LipschitzCertificate& cert) {
  Json j;
  j["method"] = to_string(cert.method);
  j["bound"] = cert.bound;
  j["trials"] = cert.trials;
  j["pass"] = cert.pass;
  if (cert.worst_x.size() > 0) {
    j["worst_x"] = to_json(cert.worst_x);
    j["worst_y"] = to_json(cert.worst_y);
  }
  return j;
}

Json to_json(const FixedPointResult& r) {
  Json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["point"] = to_json(r.point);
  return j;
}

Json to_json(const Orbit& orbit) {
  Json j;
  j["minimal_period"] = orbit.minimal_period;
  j["detected_lag"] = orbit.detected_lag;
  j["transient_iterations"] = orbit.transient_iterations;
  j["cycle_defect"] = orbit.cycle_defect;
  j["min_separation"] = orbit.min_separation;
  j["representative"] = to_json(orbit.representative);
  Json pts = Json::array();
  for (const Vector& p : orbit.points) pts.push_back(to_json(p));
  j["points"] = std::move(pts);
  return j;
}

Json to_json(const BoundAudit& audit) {
  Json j;
  j["q"] = audit.q;
  j["n"] = audit.n;
  j["p_norm"] = audit.p_norm;
  j["divides_q"] = audit.divides_q;
  j["permutation_order_form"] = audit.permutation_order_form;
  j["below_2n"] = audit.below_2n;
  j["below_best_known"] = audit.below_best_known;
  return j;
}

Json to_json(const LockedSet& locked) {
  Json j;
  j["face"] = to_json(locked.face);
  j["witness_v"] = to_json(locked.witness_v);
  j["witness_w"] = to_json(locked.witness_w);
  return j;
}

Json to_json(const IsometryCheck& check) {
  Json j;
  j["pairs"] = check.pairs;
  j["max_defect"] = check.max_defect;
  j["inverse_defect"] = check.inverse_defect;
  return j;
}

Json to_json(const Linearization& lin) {
  Json j;
  j["samples"] = lin.samples;
  j["linearity_defect"] = lin.linearity_defect;
  j["matrix_on_w"] = to_json(lin.on_w);
  j["matrix_ambient"] = to_json(lin.ambient);
  return j;
}

Json to_json(const StructureReport& r) {
  Json j;
  j["starts"] = r.starts;
  j["converged"] = r.converged;
  j["discovery_stabilized"] = r.discovery_stabilized;
  j["basepoint"] = to_json(r.basepoint);
  Json fps = Json::array();
  for (const Vector& p : r.fixed_points) fps.push_back(to_json(p));
  j["fixed_points"] = std::move(fps);
  Json locked = Json::array();
  for (const LockedSet& s : r.locked) locked.push_back(to_json(s));
  j["locked_faces"] = std::move(locked);
  Json minimal = Json::array();
  for (const LockedSet& s : r.minimal) minimal.push_back(to_json(s));
  j["minimal_faces"] = std::move(minimal);
  j["v"] = to_json(r.v);
  j["w"] = to_json(r.w);
  j["derivative"] = Json{{"point", to_json(r.u)},
                         {"attempts", r.derivative_attempts},
                         {"matrix", to_json(r.a)}};
  j["projection"] = Json{{"a2_defect", r.a2_defect},
                         {"opnorm_estimate", r.opnorm_estimate},
                         {"opnorm_exact", r.opnorm_exact},
                         {"nonexpansive", r.projection_nonexpansive}};
  j["isometry"] = to_json(r.isometry);
  j["value_preservation_defect"] = r.value_preservation;
  return j;
}

Json report_shell(const std::string& command, const ExperimentConfig& config) {
  Json j;
  j["schema"] = "polyfix-report-v1";
  j["command"] = command;
  Json cfg;
  cfg["name"] = config.name;
  cfg["norm"] = config.norm_spec;
  cfg["map"] = config.map_spec;
  cfg["tolerances"] = Json{{"fp_tol", config.tolerances.fp_tol},
                           {"orbit_tol", config.tolerances.orbit_tol},
                           {"face_tol", config.tolerances.face_tol},
                           {"check_tol", config.tolerances.check_tol}};
  cfg["caps"] = Json{{"max_iter", config.caps.max_iter},
                     {"p_max", config.caps.p_max},
                     {"retry_budget", config.caps.retry_budget}};
  cfg["starts"] = config.starts;
  cfg["seed"] = config.seed;
  cfg["box_radius"] = config.box_radius;
  cfg["linearize"] = config.linearize;
  j["config"] = std::move(cfg);
  return j;
}

std::string render_report(const Json& j) { return j.dump(2) + "\n"; }

void write_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open output path: " + path);
  out << render_report(j);
  if (!out) throw config_error("failed writing output: " + path);
}

}  // namespace polyfix
