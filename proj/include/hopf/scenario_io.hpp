#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hopf/sim.hpp"

namespace hopf {

/// Thrown on scenario text that does not parse or validate; the
/// message carries one line-anchored diagnostic per problem.
struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses the key-value scenario format (see the shipped .cfg files).
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

/// Canonical text form; parse(serialize(cfg)) reproduces cfg.
std::string serialize_scenario(const ScenarioConfig& cfg);

/// Comma-separated trajectory table, one row per logged step, with at
/// least 9 significant digits on every numeric column.
void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log, int k);
std::string trajectory_csv(const TrajectoryLog& log, int k);

/// One-paragraph run summary for terminals and sweep tables.
std::string summarize_result(const SimResult& result, const TrajectoryLog& log);

/// CLI entry point (subcommands run / reach / sweep). Returns the
/// process exit code: 0 ok, 1 usage/validation, 2 runtime failure.
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace hopf
