// Scenario runner for the driven tight-binding model.
//
//   tbdyn run <config>               closed-form outputs (+ oracle check if enabled)
//   tbdyn compare <config>           closed form against direct integration
//   tbdyn band <config>              quasienergy band (+ ring monodromy if oracle enabled)
//   tbdyn localization-map <config>  gamma_n over a grid of f1 / omega
//
// Outputs go to <out-dir>/<scenario name>; the out dir defaults to $TBDYN_OUT_DIR, then
// ./tbdyn_out.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tbdyn/error.hpp"
#include "tbdyn/runner.hpp"
#include "tbdyn/scenario.hpp"

namespace {

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("TBDYN_OUT_DIR"); env && *env) return env;
  return "tbdyn_out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form dynamics of the driven tight-binding lattice"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "Scenario file (.cfg or .json)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", out_dir, "Output directory (default: $TBDYN_OUT_DIR or ./tbdyn_out)");
    sub->add_option("--seed", seed, "Override the scenario seed");
    sub->add_option("--tolerance", tolerance, "Override the oracle comparison tolerance");
  };
  auto* run = app.add_subcommand("run", "Run a scenario and write its outputs");
  auto* compare = app.add_subcommand("compare", "Compare the closed form with the oracle");
  auto* band = app.add_subcommand("band", "Quasienergy band of a resonant drive");
  auto* map = app.add_subcommand("localization-map", "Drift rate over a sweep of f1/omega");
  for (auto* sub : {run, compare, band, map}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    auto scenario = tbdyn::load_scenario(config);
    tbdyn::apply_overrides(scenario, seed, tolerance);
    const std::filesystem::path root = out_dir.empty() ? default_out_dir() : std::filesystem::path(out_dir);
    const auto dir = root / scenario.name;

    tbdyn::CommandResult result;
    if (run->parsed()) {
      result = tbdyn::run_scenario(scenario, dir);
    } else if (compare->parsed()) {
      result = tbdyn::compare_with_oracle(scenario, dir);
    } else if (band->parsed()) {
      result = tbdyn::run_band(scenario, dir);
    } else {
      result = tbdyn::run_localization_map(scenario, dir);
    }

    if (!result.report.empty()) std::cout << result.report;
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << "\n";
    if (result.exit_code == tbdyn::kExitOracleDivergence) {
      std::cerr << fmt::format("tbdyn: {}: closed form and oracle disagree beyond tolerance\n",
                               scenario.name);
    }
    return result.exit_code;
  } catch (const tbdyn::ConfigError& e) {
    std::cerr << "tbdyn: config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "tbdyn: " << e.what() << "\n";
    return 1;
  }
}
