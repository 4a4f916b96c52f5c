#ifndef TBCTL_RUNNER_HPP
#define TBCTL_RUNNER_HPP

#include "tbctl/config.hpp"
#include "tbctl/econ.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tbctl {

/// Exit codes shared by the pipelines and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitUndefinedRatio = 4;

/// Uncontrolled forward simulation; writes the trajectory and a summary.
int run_simulate(const RunConfig& config, const std::filesystem::path& out_dir);

/// Forward-backward sweep per scenario mask; writes per-scenario solution,
/// aggregated controls, yearly averages and a summary. Returns
/// kExitNoConvergence when any scenario hits the iteration cap.
int run_optimize(const RunConfig& config, const std::filesystem::path& out_dir);

/// LHS + PRCC of R0 over the configured ranges.
int run_sensitivity(const RunConfig& config, const std::filesystem::path& out_dir);

/// Full cost-effectiveness pipeline. Outcomes are computed in-process from
/// the optimizer unless config.outcomes_file injects an external table.
int run_cea(const RunConfig& config, const std::filesystem::path& out_dir);

/// Parse an outcomes CSV (scenario,total_cost,averted_cases[,recovered_cases]).
std::vector<InterventionOutcome> load_outcomes_file(const std::filesystem::path& path);

} // namespace tbctl

#endif
