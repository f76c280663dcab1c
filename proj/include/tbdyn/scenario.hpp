#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tbdyn/config.hpp"
#include "tbdyn/drive.hpp"
#include "tbdyn/lattice.hpp"
#include "tbdyn/oracle.hpp"
#include "tbdyn/propagator.hpp"

namespace tbdyn {

enum class Output {
  phase_integrals,
  observables,
  state_snapshots,
  band,
  invariant,
  classical,
  localization_report,
};

std::string to_string(Output o);
std::optional<Output> output_from_string(const std::string& s);

struct TimeGrid {
  double t_max = 0.0;
  int samples = 2;

  std::vector<double> times() const;
};

struct OracleSettings {
  bool enabled = false;
  OracleConfig config;
  /// Largest closed-form vs oracle deviation accepted by run and compare.
  double tolerance = 1e-6;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;

  Window window;
  Boundary boundary = Boundary::open;
  EvolveOptions evolve;

  StateSpec state;
  DriveProtocol drive = DriveProtocol::dc(0.0, 0.0);
  /// Present for single-band scenarios; the drive then supplies only the field.
  std::optional<SingleBandDispersion> dispersion;
  CommutatorConvention convention = CommutatorConvention::ladder;

  TimeGrid time;
  std::set<Output> outputs;
  std::vector<double> snapshot_times;

  OracleSettings oracle;

  std::size_t classical_samples = 100000;
  double delta = 1.0;

  int band_points = 64;
  int ring_sites = 32;

  double map_ratio_min = 0.0;
  double map_ratio_max = 10.0;
  int map_points = 201;

  /// Normalized form of the scenario; its hash tags every output file.
  nlohmann::json canonical;
  std::string hash;

  bool wants(Output o) const { return outputs.count(o) > 0; }
  LatticeState initial_state() const;
};

/// Validates a parsed document. Errors name the offending field and, for text input, its line.
Scenario scenario_from_document(const ConfigDocument& doc);
Scenario load_scenario(const std::filesystem::path& path);

/// Replaces the seed and/or comparison tolerance and refreshes the hash.
void apply_overrides(Scenario& s, std::optional<std::uint64_t> seed, std::optional<double> tolerance);

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace tbdyn
