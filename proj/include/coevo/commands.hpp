#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/config.hpp"
#include "coevo/dynamics.hpp"
#include "coevo/learning.hpp"

namespace coevo {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitNumerical = 2,
  kExitPartial = 3,
};

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json manifest;  // also written to <out>/manifest.json
  std::string message;      // short human-readable status
};

enum class SweepParam { temperature, epsilon };

// Learning parameters for a config with a learning section. The sampling
// seed is a split stream of config.seed.
LearningParams learning_params(const RunConfig& config);
// Trajectory of the configured run without writing anything. Throws
// NumericalFailure.
Trajectory simulate(const RunConfig& config);

// Output directory is `out` when non-empty, otherwise config.output.
CommandResult cmd_run(const RunConfig& config, const std::filesystem::path& out = {});
CommandResult cmd_sweep(const RunConfig& config, SweepParam param, const std::vector<double>& grid,
                        const std::filesystem::path& out = {}, std::size_t jobs = 1);
CommandResult cmd_analyze(const RunConfig& config, const std::filesystem::path& out = {},
                          bool critical_temp = false);
CommandResult cmd_compare(const RunConfig& config, const std::filesystem::path& out = {});

// "a:b:step" (inclusive of b up to rounding) or "v1,v2,...".
std::vector<double> parse_grid(std::string_view text);
SweepParam parse_sweep_param(std::string_view name);

// Level from COEVO_LOG (trace, debug, info, warn, error, off); default warn.
void init_logging();

}  // namespace coevo
