#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "dcsmooth/config.hpp"

namespace dcsmooth {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitMaxIters = 2;
inline constexpr int kExitCheckFailed = 3;
inline constexpr int kExitConfig = 64;

/// --threads if given, else DCSMOOTH_THREADS, else the config value, else the
/// number of hardware threads.
int resolve_threads(std::optional<int> flag, const char* env, int config_threads);

/// Writes trace.csv, result.json and effective_config.json into cfg.out.
/// 0 on GradTol, 2 on MaxIters, 1 on solver or I/O failure.
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Writes results.csv, summary.csv and effective_config.json into cfg.out and
/// prints the summary table. 0 once every trial ran, 1 on I/O failure.
int cmd_experiment(const RunConfig& cfg, int threads, std::ostream& out, std::ostream& err);

/// Runs the verification suites; 0 if all pass, else 3 with the first
/// counterexample of each failing suite.
int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Entry point of the dcsmooth executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dcsmooth
