#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tbdyn/scenario.hpp"

namespace tbdyn {

/// Exit status used when the closed form and the oracle disagree beyond the tolerance.
inline constexpr int kExitOracleDivergence = 2;

struct CommandResult {
  nlohmann::json summary;
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
  /// Human-readable table (compare, band).
  std::string report;
};

/// Writes the requested outputs and summary.json into out_dir.
CommandResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Closed form against the oracle on the scenario's time grid: compare.csv and compare.json.
CommandResult compare_with_oracle(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Quasienergy band (and the ring monodromy spectrum when the oracle is enabled).
CommandResult run_band(const Scenario& scenario, const std::filesystem::path& out_dir);

/// gamma_n over a grid of f1 / omega for the scenario's harmonic drive.
CommandResult run_localization_map(const Scenario& scenario, const std::filesystem::path& out_dir);

}  // namespace tbdyn
