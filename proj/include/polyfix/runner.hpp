#pragma once

#include <optional>
#include <string>

#include "polyfix/config.hpp"
#include "polyfix/errors.hpp"

namespace polyfix {

// Exit-code contract: 0 ok, 1 usage or config, 2 certification FAIL,
// 3 theorem-audit alarm, 4 precondition unmet (empty fixed set, no orbit).
struct RunOutcome {
  int exit_code = 0;
  Json report;
};

int exit_code_for(const Error& e);

RunOutcome run_certify(const ExperimentConfig& config);
RunOutcome run_fix(const ExperimentConfig& config);
RunOutcome run_orbit(const ExperimentConfig& config);
RunOutcome run_structure(const ExperimentConfig& config, bool oracle);

// Runs certify, orbit, and structure over every *.json in config_dir
// (sorted by filename). Writes per-run reports and summary.csv into out_dir
// when non-empty. Exit code is the maximum over per-run codes; an empty or
// missing directory is a usage error.
RunOutcome run_suite(const std::string& config_dir, const std::string& out_dir,
                     bool oracle,
                     std::optional<std::uint64_t> seed_override = std::nullopt,
                     std::optional<int> starts_override = std::nullopt);

// Table of the partition lcm sets and their maxima for n = 1..max_n.
RunOutcome run_landau(int max_n);

}  // namespace polyfix
