#pragma once

#include <string>

#include "polyfix/config.hpp"
#include "polyfix/dynamics.hpp"
#include "polyfix/maps.hpp"
#include "polyfix/structure.hpp"

namespace polyfix {

// JSON views of library results. Keys are emitted in a fixed order so two
// runs with the same seed produce byte-identical documents; any wall-clock
// data lives only under the top-level "timing" object.

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Json to_json(const Subspace& s);
Json to_json(const DualFace& face);
Json to_json(const LipschitzCertificate& cert);
Json to_json(const FixedPointResult& r);
Json to_json(const Orbit& orbit);
Json to_json(const BoundAudit& audit);
Json to_json(const LockedSet& locked);
Json to_json(const IsometryCheck& check);
Json to_json(const Linearization& lin);
Json to_json(const StructureReport& r);

// Top-level document skeleton: schema tag, command, config echo.
Json report_shell(const std::string& command, const ExperimentConfig& config);

// Serializes with 2-space indentation and a trailing newline.
std::string render_report(const Json& j);
void write_json_file(const Json& j, const std::string& path);

}  // namespace polyfix
