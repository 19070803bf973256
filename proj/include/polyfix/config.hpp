#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>

#include "polyfix/maps.hpp"
#include "polyfix/polynorm.hpp"

namespace polyfix {

using Json = nlohmann::ordered_json;

struct ToleranceSet {
  double fp_tol = 1e-10;
  double orbit_tol = 1e-8;
  double face_tol = 1e-9;
  double check_tol = 1e-8;
};

struct CapSet {
  long max_iter = 200000;
  long p_max = 0;  // 0 derives the dimension bound, truncated at 4096
  int retry_budget = 16;
};

// One experiment: a norm, a map, and the knobs of the run. The norm and map
// stay as raw specs here (echoed verbatim into reports); build them with
// norm_from_spec / map_from_spec.
struct ExperimentConfig {
  std::string name = "unnamed";
  Json norm_spec;
  Json map_spec;
  ToleranceSet tolerances;
  CapSet caps;
  int starts = 64;
  std::uint64_t seed = 1;
  double box_radius = 2.0;
  bool linearize = false;

  // 1 for the 1-norm family, 0 for sup and custom norms.
  int p_norm() const;
  bool builtin_norm() const;  // theorem audits alarm only for built-in kinds
};

// Strict parsers: unknown keys, wrong types, or out-of-range values throw
// CONFIG-ERROR with the offending path.
ExperimentConfig parse_config(const Json& j, const std::string& fallback_name);
ExperimentConfig load_config(const std::string& path);

PolyhedralNorm norm_from_spec(const Json& spec);
MapSpec map_from_spec(const Json& spec);

}  // namespace polyfix
