// polyfix: fixed-point geometry and periodic-orbit structure of nonexpansive
// maps on polyhedral normed spaces. Subcommands wrap the library pipelines;
// reports are JSON, exit codes follow the 0/1/2/3/4 contract in runner.hpp.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "polyfix/errors.hpp"
#include "polyfix/report.hpp"
#include "polyfix/runner.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int starts = 0;
  bool starts_set = false;
  bool oracle = false;
  bool quiet = false;
  int landau_n = 12;
};

void add_common(CLI::App* cmd, Flags& flags, bool config_is_dir) {
  auto* config = cmd->add_option("--config", flags.config,
                                 config_is_dir ? "Directory of experiment configs"
                                               : "Experiment config (JSON)");
  config->required();
  cmd->add_option("--out", flags.out,
                  config_is_dir ? "Output directory for reports and summary.csv"
                                : "Write the JSON report here instead of stdout");
  cmd->add_option("--seed", flags.seed, "Override the config seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--starts", flags.starts, "Override the config start count")
      ->check(CLI::PositiveNumber)
      ->each([&flags](const std::string&) { flags.starts_set = true; });
  cmd->add_flag("--oracle", flags.oracle,
                "Cross-check locked faces against the exhaustive grid oracle");
  cmd->add_flag("--quiet", flags.quiet, "Suppress non-error output");
}

polyfix::ExperimentConfig load_with_overrides(const Flags& flags) {
  polyfix::ExperimentConfig config = polyfix::load_config(flags.config);
  if (flags.seed_set) config.seed = flags.seed;
  if (flags.starts_set) config.starts = flags.starts;
  return config;
}

void print_landau_table(const polyfix::Json& report) {
  std::printf("%3s  %12s  %s\n", "n", "g(n)", "lcm set");
  for (const auto& row : report["table"]) {
    std::string set = "{";
    bool first = true;
    for (const auto& v : row["lcm_set"]) {
      if (!first) set += ", ";
      set += std::to_string(v.get<long long>());
      first = false;
    }
    set += "}";
    std::printf("%3d  %12lld  %s\n", row["n"].get<int>(),
                row["landau"].get<long long>(), set.c_str());
  }
}

void emit(const polyfix::RunOutcome& outcome, const Flags& flags,
          const std::string& command) {
  if (command == "suite") {
    // run_suite writes its own files; echo the CSV when nothing was written.
    if (!flags.quiet && flags.out.empty()) {
      std::cout << outcome.report["csv"].get<std::string>();
    }
  } else if (command == "landau") {
    if (!flags.out.empty()) polyfix::write_json_file(outcome.report, flags.out);
    if (!flags.quiet) print_landau_table(outcome.report);
  } else {
    if (!flags.out.empty()) {
      polyfix::write_json_file(outcome.report, flags.out);
    } else if (!flags.quiet) {
      std::cout << polyfix::render_report(outcome.report);
    }
  }
  if (!flags.quiet) {
    std::cerr << command << ": " << outcome.report.value("status", "ok") << " (exit "
              << outcome.exit_code << ")\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-point and periodic-orbit structure of nonexpansive maps "
               "on polyhedral normed spaces"};
  app.require_subcommand(1);

  Flags flags;
  CLI::App* certify = app.add_subcommand("certify", "Nonexpansiveness certificate");
  CLI::App* fix = app.add_subcommand("fix", "Fixed points from random starts");
  CLI::App* orbit = app.add_subcommand("orbit", "Periodic orbits and period-bound audit");
  CLI::App* structure =
      app.add_subcommand("structure", "Locked faces, V(f), retract derivative, W");
  CLI::App* suite = app.add_subcommand("suite", "Run every config in a directory");
  CLI::App* landau =
      app.add_subcommand("landau", "Partition lcm sets and their maxima");
  for (CLI::App* cmd : {certify, fix, orbit, structure}) add_common(cmd, flags, false);
  add_common(suite, flags, true);
  landau->add_option("n", flags.landau_n, "Largest dimension tabulated")
      ->check(CLI::Range(1, 20));
  landau->add_option("--out", flags.out, "Write the JSON table here");
  landau->add_flag("--quiet", flags.quiet, "Suppress non-error output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    polyfix::RunOutcome outcome;
    std::string command;
    if (certify->parsed()) {
      command = "certify";
      outcome = polyfix::run_certify(load_with_overrides(flags));
    } else if (fix->parsed()) {
      command = "fix";
      outcome = polyfix::run_fix(load_with_overrides(flags));
    } else if (orbit->parsed()) {
      command = "orbit";
      outcome = polyfix::run_orbit(load_with_overrides(flags));
    } else if (structure->parsed()) {
      command = "structure";
      outcome = polyfix::run_structure(load_with_overrides(flags), flags.oracle);
    } else if (suite->parsed()) {
      command = "suite";
      outcome = polyfix::run_suite(
          flags.config, flags.out, flags.oracle,
          flags.seed_set ? std::optional<std::uint64_t>(flags.seed) : std::nullopt,
          flags.starts_set ? std::optional<int>(flags.starts) : std::nullopt);
    } else {
      command = "landau";
      outcome = polyfix::run_landau(flags.landau_n);
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    outcome.report["timing"] = polyfix::Json{{"wall_clock_ms", ms}};
    emit(outcome, flags, command);
    return outcome.exit_code;
  } catch (const polyfix::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return polyfix::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
