#include "polyfix/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "polyfix/errors.hpp"

namespace polyfix {

namespace {

void require_keys(const Json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) {
    throw config_error(where + " must be a JSON object");
  }
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw config_error(where + ": unknown key \"" + item.key() + "\"");
    }
  }
}

double number_at(const Json& j, const std::string& where) {
  if (!j.is_number()) throw config_error(where + " must be a number");
  return j.get<double>();
}

long integer_at(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw config_error(where + " must be an integer");
  return j.get<long>();
}

Vector vector_at(const Json& j, const std::string& where) {
  if (!j.is_array()) throw config_error(where + " must be an array of numbers");
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<int>(i)] = number_at(j[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix matrix_at(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw config_error(where + " must be a nonempty array of rows");
  }
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<int>(j.size()), static_cast<int>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_where = where + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) {
      throw config_error(row_where + " must be an array of length " +
                         std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<int>(r), static_cast<int>(c)) =
          number_at(j[r][c], row_where + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

std::vector<Activation> activations_at(const Json& j, const std::string& where) {
  std::vector<Activation> acts;
  if (j.is_string()) {
    acts.push_back(activation_from_string(j.get<std::string>()));
  } else if (j.is_array() && !j.empty()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_string()) {
        throw config_error(where + "[" + std::to_string(i) + "] must be a string");
      }
      acts.push_back(activation_from_string(j[i].get<std::string>()));
    }
  } else {
    throw config_error(where + " must be a string or nonempty array of strings");
  }
  return acts;
}

}  // namespace

int ExperimentConfig::p_norm() const {
  return norm_spec.value("kind", "") == "l1" ? 1 : 0;
}

bool ExperimentConfig::builtin_norm() const {
  const std::string kind = norm_spec.value("kind", "");
  return kind == "linf" || kind == "l1";
}

PolyhedralNorm norm_from_spec(const Json& spec) {
  require_keys(spec, "norm", {"kind", "n", "dual_extremes"});
  if (!spec.contains("kind") || !spec["kind"].is_string()) {
    throw config_error("norm.kind must be \"linf\", \"l1\", or \"custom\"");
  }
  const std::string kind = spec["kind"].get<std::string>();
  if (kind == "custom") {
    if (!spec.contains("dual_extremes")) {
      throw config_error("norm.dual_extremes is required for custom norms");
    }
    const Matrix rows = matrix_at(spec["dual_extremes"], "norm.dual_extremes");
    if (spec.contains("n") &&
        integer_at(spec["n"], "norm.n") != rows.cols()) {
      throw config_error("norm.n disagrees with the width of norm.dual_extremes");
    }
    return PolyhedralNorm::custom(rows);
  }
  if (!spec.contains("n")) throw config_error("norm.n is required");
  const long n = integer_at(spec["n"], "norm.n");
  if (n < 1) throw config_error("norm.n must be >= 1");
  if (spec.contains("dual_extremes")) {
    throw config_error("norm.dual_extremes only applies to custom norms");
  }
  if (kind == "linf") return PolyhedralNorm::linf(static_cast<int>(n));
  if (kind == "l1") return PolyhedralNorm::l1(static_cast<int>(n));
  throw config_error("norm.kind \"" + kind + "\" is not recognized");
}

MapSpec map_from_spec(const Json& spec) {
  if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string()) {
    throw config_error("map.kind must name a map variant");
  }
  const std::string kind = spec["kind"].get<std::string>();
  if (kind == "affine") {
    require_keys(spec, "map(affine)", {"kind", "m", "b"});
    if (!spec.contains("m")) throw config_error("map.m is required for affine maps");
    Matrix m = matrix_at(spec["m"], "map.m");
    Vector b = spec.contains("b") ? vector_at(spec["b"], "map.b")
                                  : Vector::Zero(m.rows());
    return MapSpec::affine(std::move(m), std::move(b));
  }
  if (kind == "analytic_layers") {
    require_keys(spec, "map(analytic_layers)", {"kind", "layers"});
    if (!spec.contains("layers") || !spec["layers"].is_array() ||
        spec["layers"].empty()) {
      throw config_error("map.layers must be a nonempty array");
    }
    std::vector<Layer> layers;
    for (std::size_t i = 0; i < spec["layers"].size(); ++i) {
      const Json& lj = spec["layers"][i];
      const std::string where = "map.layers[" + std::to_string(i) + "]";
      require_keys(lj, where, {"w", "b", "activation"});
      if (!lj.contains("w")) throw config_error(where + ".w is required");
      Layer layer;
      layer.w = matrix_at(lj["w"], where + ".w");
      layer.b = lj.contains("b") ? vector_at(lj["b"], where + ".b")
                                 : Vector::Zero(layer.w.rows());
      layer.act = lj.contains("activation")
                      ? activations_at(lj["activation"], where + ".activation")
                      : std::vector<Activation>{Activation::Identity};
      layers.push_back(std::move(layer));
    }
    return MapSpec::analytic_layers(std::move(layers));
  }
  if (kind == "tensor_h") {
    require_keys(spec, "map(tensor_h)", {"kind", "order", "n", "coefficients"});
    for (const char* key : {"order", "n", "coefficients"}) {
      if (!spec.contains(key)) {
        throw config_error(std::string("map.") + key + " is required for tensor maps");
      }
    }
    const long order = integer_at(spec["order"], "map.order");
    const long n = integer_at(spec["n"], "map.n");
    if (!spec["coefficients"].is_array()) {
      throw config_error("map.coefficients must be a flat array");
    }
    std::vector<double> coeffs;
    coeffs.reserve(spec["coefficients"].size());
    for (std::size_t i = 0; i < spec["coefficients"].size(); ++i) {
      coeffs.push_back(number_at(spec["coefficients"][i],
                                 "map.coefficients[" + std::to_string(i) + "]"));
    }
    return MapSpec::tensor_h(static_cast<int>(order), static_cast<int>(n),
                             std::move(coeffs));
  }
  if (kind == "composite") {
    require_keys(spec, "map(composite)", {"kind", "maps"});
    if (!spec.contains("maps") || !spec["maps"].is_array() || spec["maps"].empty()) {
      throw config_error("map.maps must be a nonempty array of map specs");
    }
    std::vector<MapSpec> maps;
    for (const Json& mj : spec["maps"]) maps.push_back(map_from_spec(mj));
    return MapSpec::composite(std::move(maps));
  }
  throw config_error("map.kind \"" + kind + "\" is not recognized");
}

ExperimentConfig parse_config(const Json& j, const std::string& fallback_name) {
  require_keys(j, "config",
               {"schema", "name", "norm", "map", "tolerances", "caps", "starts",
                "seed", "box_radius", "linearize"});
  if (j.contains("schema")) {
    if (!j["schema"].is_string() ||
        j["schema"].get<std::string>() != "polyfix-config-v1") {
      throw config_error("config.schema must be \"polyfix-config-v1\"");
    }
  }
  for (const char* key : {"norm", "map"}) {
    if (!j.contains(key)) {
      throw config_error(std::string("config.") + key + " is required");
    }
  }

  ExperimentConfig config;
  config.name = j.value("name", fallback_name);
  if (config.name.empty()) config.name = fallback_name;
  config.norm_spec = j["norm"];
  config.map_spec = j["map"];

  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    require_keys(t, "config.tolerances",
                 {"fp_tol", "orbit_tol", "face_tol", "check_tol"});
    if (t.contains("fp_tol")) config.tolerances.fp_tol = number_at(t["fp_tol"], "fp_tol");
    if (t.contains("orbit_tol")) {
      config.tolerances.orbit_tol = number_at(t["orbit_tol"], "orbit_tol");
    }
    if (t.contains("face_tol")) {
      config.tolerances.face_tol = number_at(t["face_tol"], "face_tol");
    }
    if (t.contains("check_tol")) {
      config.tolerances.check_tol = number_at(t["check_tol"], "check_tol");
    }
  }
  if (config.tolerances.fp_tol <= 0.0 || config.tolerances.orbit_tol <= 0.0 ||
      config.tolerances.face_tol <= 0.0 || config.tolerances.check_tol <= 0.0) {
    throw config_error("config.tolerances must all be positive");
  }

  if (j.contains("caps")) {
    const Json& c = j["caps"];
    require_keys(c, "config.caps", {"max_iter", "p_max", "retry_budget"});
    if (c.contains("max_iter")) {
      config.caps.max_iter = integer_at(c["max_iter"], "caps.max_iter");
    }
    if (c.contains("p_max")) config.caps.p_max = integer_at(c["p_max"], "caps.p_max");
    if (c.contains("retry_budget")) {
      config.caps.retry_budget =
          static_cast<int>(integer_at(c["retry_budget"], "caps.retry_budget"));
    }
  }
  if (config.caps.max_iter < 1 || config.caps.retry_budget < 1 ||
      config.caps.p_max < 0) {
    throw config_error("config.caps: max_iter and retry_budget must be >= 1, "
                       "p_max >= 0 (0 means automatic)");
  }

  if (j.contains("starts")) {
    config.starts = static_cast<int>(integer_at(j["starts"], "config.starts"));
  }
  if (config.starts < 1) throw config_error("config.starts must be >= 1");
  if (j.contains("seed")) {
    const long seed = integer_at(j["seed"], "config.seed");
    if (seed < 0) throw config_error("config.seed must be >= 0");
    config.seed = static_cast<std::uint64_t>(seed);
  }
  if (j.contains("box_radius")) {
    config.box_radius = number_at(j["box_radius"], "config.box_radius");
    if (config.box_radius <= 0.0) {
      throw config_error("config.box_radius must be positive");
    }
  }
  if (j.contains("linearize")) {
    if (!j["linearize"].is_boolean()) {
      throw config_error("config.linearize must be a boolean");
    }
    config.linearize = j["linearize"].get<bool>();
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error("config file " + path + " is not valid JSON: " + e.what());
  }
  std::string stem = path;
  const std::size_t slash = stem.find_last_of('/');
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  const std::size_t dot = stem.find_last_of('.');
  if (dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_config(j, stem);
}

}  // namespace polyfix
