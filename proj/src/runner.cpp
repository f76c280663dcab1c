#include "tbdyn/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <tuple>

#include <fmt/format.h>

#include "tbdyn/bessel.hpp"
#include "tbdyn/classical.hpp"
#include "tbdyn/error.hpp"
#include "tbdyn/floquet.hpp"
#include "tbdyn/observables.hpp"
#include "tbdyn/oracle.hpp"

namespace tbdyn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Monodromy eigenphases against the closed-form band.
constexpr double kBandTolerance = 1e-4;

class CsvFile {
 public:
  CsvFile(const fs::path& path, const Scenario& s, const std::vector<std::string>& columns,
          const std::string& extra = {})
      : out_(path), columns_(columns.size()) {
    if (!out_) throw Error(fmt::format("cannot write {}", path.string()));
    out_ << fmt::format("# scenario={} hash={}{}\n", s.name, s.hash, extra.empty() ? "" : " " + extra);
    out_ << fmt::format("{}\n", fmt::join(columns, ","));
  }

  void row(const std::vector<double>& values) {
    if (values.size() != columns_) throw Error("csv row width mismatch");
    out_ << fmt::format("{}\n", fmt::join(values, ","));
  }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << j.dump(2) << "\n";
}

json header(const Scenario& s, const std::string& command) {
  return {{"command", command}, {"scenario", s.name}, {"hash", s.hash}, {"drive", s.drive.describe()}};
}

EvolveResult closed_form(const Scenario& s, const LatticeState& psi0, double t,
                         CommutatorConvention convention) {
  if (s.dispersion) return evolve_single_band(psi0, *s.dispersion, s.drive, t, s.evolve, convention);
  return evolve(psi0, s.drive, t, s.evolve);
}

EvolveResult closed_form(const Scenario& s, const LatticeState& psi0, double t) {
  return closed_form(s, psi0, t, s.convention);
}

OracleResult oracle_step(const Scenario& s, const LatticeState& psi, double t0, double t1) {
  if (s.dispersion) return integrate(psi, *s.dispersion, s.drive, t0, t1, s.oracle.config);
  return integrate(psi, s.drive, t0, t1, s.oracle.config);
}

// Phase integrals reported for a scenario; single-band runs report chi_1.
PhaseIntegrals scenario_phase(const Scenario& s, double t) {
  if (!s.dispersion) return phase_integrals(s.drive, t);
  const auto p = propagator_params(*s.dispersion, s.drive, t, s.convention);
  const cplx x = p.chi[1];
  return {t, p.eta, x, 2.0 * x.real(), -2.0 * x.imag()};
}

std::pair<double, double> mean_var(const LatticeState& st) {
  const double norm = st.norm_squared();
  const auto [m1, m2] = position_moments(st);
  const double mean = m1 / norm;
  return {mean, m2 / norm - mean * mean};
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

// Closed-form <N> and Var N. Nearest-neighbour runs on open windows use the Heisenberg-picture
// formulas; everything else reads the moments of the closed-form evolved state.
Moments closed_moments(const Scenario& s, const CoherenceParameters& coh, const LatticeState& psi0,
                       const PhaseIntegrals& phase, const LatticeState* evolved) {
  if (!s.dispersion && s.boundary == Boundary::open) {
    return {expect_N(coh, phase), variance_N_covariance(coh, phase)};
  }
  if (s.dispersion && s.boundary == Boundary::open && evolved) {
    const auto params = propagator_params(*s.dispersion, s.drive, phase.t, s.convention);
    std::vector<cplx> moments;
    for (std::size_t m = 0; m < params.chi.size(); ++m) {
      moments.push_back(shift_moment(psi0, static_cast<int>(m)));
    }
    return {expect_N_single_band(coh.n_mean, moments, params, s.convention), mean_var(*evolved).second};
  }
  if (!evolved) throw Error("internal: evolved state required");
  const auto [m, v] = mean_var(*evolved);
  return {m, v};
}

struct OracleRow {
  double t = 0.0;
  double amplitude_deviation = 0.0;
  double n_closed = 0.0;
  double n_oracle = 0.0;
  double var_closed = 0.0;
  double var_oracle = 0.0;
  double leaked = 0.0;
  double norm_drift = 0.0;
  double alternate_deviation = 0.0;
};

std::vector<OracleRow> oracle_series(const Scenario& s, const LatticeState& psi0,
                                     const std::vector<double>& times) {
  const auto coh = coherence_parameters(psi0);
  const auto alternate = s.convention == CommutatorConvention::ladder
                             ? CommutatorConvention::power_of_two
                             : CommutatorConvention::ladder;
  std::vector<OracleRow> rows;
  LatticeState psi = psi0;
  double prev = 0.0;
  double leaked = 0.0;
  for (double t : times) {
    if (t != prev) {
      auto r = oracle_step(s, psi, prev, t);
      psi = std::move(r.state);
      leaked = std::max(leaked, r.leaked);
    }
    prev = t;
    OracleRow row;
    row.t = t;
    const auto closed = closed_form(s, psi0, t);
    row.amplitude_deviation = max_amplitude_deviation(closed.state, psi);
    const auto m = closed_moments(s, coh, psi0, scenario_phase(s, t), &closed.state);
    row.n_closed = m.mean;
    row.var_closed = m.var;
    std::tie(row.n_oracle, row.var_oracle) = mean_var(psi);
    row.leaked = leaked;
    row.norm_drift = std::abs(psi.norm_squared() - psi0.norm_squared());
    if (s.dispersion) {
      // The alternate convention may push amplitude off the window; keep its leak unchecked.
      EvolveOptions loose = s.evolve;
      loose.leak_tolerance = 1.0;
      const auto alt = evolve_single_band(psi0, *s.dispersion, s.drive, t, loose, alternate);
      row.alternate_deviation = max_amplitude_deviation(alt.state, psi);
    }
    rows.push_back(row);
  }
  return rows;
}

json oracle_summary(const Scenario& s, const std::vector<OracleRow>& rows) {
  double amp = 0.0, n = 0.0, var = 0.0, leak = 0.0, drift = 0.0, alt = 0.0;
  for (const auto& r : rows) {
    amp = std::max(amp, r.amplitude_deviation);
    n = std::max(n, std::abs(r.n_closed - r.n_oracle));
    var = std::max(var, std::abs(r.var_closed - r.var_oracle));
    leak = std::max(leak, r.leaked);
    drift = std::max(drift, r.norm_drift);
    alt = std::max(alt, r.alternate_deviation);
  }
  json j = {{"enabled", true},
            {"tolerance", s.oracle.tolerance},
            {"max_amplitude_deviation", amp},
            {"max_expect_N_deviation", n},
            {"max_var_N_deviation", var},
            {"max_leaked", leak},
            {"max_norm_drift", drift},
            {"pass", amp <= s.oracle.tolerance && n <= s.oracle.tolerance && var <= s.oracle.tolerance}};
  if (s.dispersion) {
    j["convention"] = s.convention == CommutatorConvention::ladder ? "ladder" : "power_of_two";
    j["alternate_convention_max_deviation"] = alt;
  }
  return j;
}

json mode_json(const ModeReport& m) {
  return {{"mode", to_string(m.mode)}, {"mean_C", m.mean_C},   {"mean_S", m.mean_S},
          {"cov_CC", m.cov_CC},        {"cov_SS", m.cov_SS},   {"cov_CS", m.cov_CS},
          {"cov_CN", m.cov_CN},        {"cov_SN", m.cov_SN},   {"space_symmetric", m.space_symmetric}};
}

json localization_json(const LocalizationReport& r) {
  json j = {{"order", r.order},
            {"gamma", r.gamma},
            {"re_amplitude", r.amplitude.real()},
            {"im_amplitude", r.amplitude.imag()},
            {"variance_slope", r.variance_slope},
            {"slope_uses_state", r.slope_uses_state},
            {"localized", r.localized},
            {"degenerate", r.degenerate}};
  j["drive_ratio"] = r.drive_ratio ? json(*r.drive_ratio) : json(nullptr);
  j["zero_below"] = r.zero_below ? json(*r.zero_below) : json(nullptr);
  j["zero_above"] = r.zero_above ? json(*r.zero_above) : json(nullptr);
  return j;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

}  // namespace

CommandResult run_scenario(const Scenario& s, const fs::path& out_dir) {
  ensure_dir(out_dir);
  CommandResult res;
  res.summary = header(s, "run");
  const auto psi0 = s.initial_state();
  const auto coh = coherence_parameters(psi0);
  const auto times = s.time.times();
  res.summary["initial"] = {{"K", {coh.K.real(), coh.K.imag()}},
                            {"J", {coh.J.real(), coh.J.imag()}},
                            {"L", {coh.L.real(), coh.L.imag()}},
                            {"n_mean", coh.n_mean},
                            {"var_N", coh.variance_N()}};
  res.summary["mode"] = mode_json(classify_mode(coh));
  if (auto r = s.drive.resonance(); r && !s.dispersion) res.summary["resonance_order"] = r->order;

  if (s.wants(Output::phase_integrals)) {
    const auto path = out_dir / "phase_integrals.csv";
    CsvFile csv(path, s, {"t", "eta", "re_chi", "im_chi", "u", "v"});
    for (double t : times) {
      const auto p = scenario_phase(s, t);
      csv.row({t, p.eta, p.chi.real(), p.chi.imag(), p.u, p.v});
    }
    res.files.push_back(path);
  }

  if (s.wants(Output::observables)) {
    const auto path = out_dir / "observables.csv";
    CsvFile csv(path, s,
                {"t", "eta", "re_chi", "im_chi", "u", "v", "expect_N", "var_N", "re_expect_K",
                 "im_expect_K"});
    double max_var = 0.0;
    double last_var = 0.0;
    for (double t : times) {
      const auto p = scenario_phase(s, t);
      std::optional<EvolveResult> evolved;
      if (s.dispersion || s.boundary == Boundary::ring) evolved = closed_form(s, psi0, t);
      const auto m = closed_moments(s, coh, psi0, p, evolved ? &evolved->state : nullptr);
      const cplx k = std::polar(1.0, -p.eta) * coh.K;
      csv.row({t, p.eta, p.chi.real(), p.chi.imag(), p.u, p.v, m.mean, m.var, k.real(), k.imag()});
      max_var = std::max(max_var, m.var);
      last_var = m.var;
    }
    res.summary["observables"] = {{"max_var_N", max_var}, {"final_var_N", last_var}};
    res.files.push_back(path);
  }

  if (s.wants(Output::state_snapshots)) {
    const auto dir = out_dir / "snapshots";
    ensure_dir(dir);
    auto snaps = s.snapshot_times;
    if (snaps.empty()) snaps = {0.0, 0.5 * s.time.t_max, s.time.t_max};
    json list = json::array();
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      const auto evolved = closed_form(s, psi0, snaps[i]);
      const auto path = dir / fmt::format("snapshot_{:03d}.csv", i);
      CsvFile csv(path, s, {"n", "re_c", "im_c", "prob"}, fmt::format("t={}", snaps[i]));
      const auto& w = evolved.state.window();
      for (int n = w.n_min; n <= w.n_max; ++n) {
        const cplx c = evolved.state.amplitudes()[n - w.n_min];
        csv.row({double(n), c.real(), c.imag(), std::norm(c)});
      }
      list.push_back({{"t", snaps[i]}, {"file", path.filename().string()}, {"leaked", evolved.leaked}});
      res.files.push_back(path);
    }
    res.summary["snapshots"] = list;
  }

  if (s.wants(Output::band)) {
    const auto band = quasienergy_band(s.drive);
    const auto path = out_dir / "band.csv";
    CsvFile csv(path, s, {"kappa", "epsilon"});
    for (double k : bloch_grid(s.band_points)) csv.row({k, band.energy(k)});
    res.summary["band"] = {{"order", band.order},
                           {"re_amplitude", band.amplitude.real()},
                           {"im_amplitude", band.amplitude.imag()},
                           {"bandwidth", band.bandwidth()}};
    res.files.push_back(path);
  }

  if (s.wants(Output::invariant)) {
    const auto path = out_dir / "invariant.csv";
    CsvFile csv(path, s,
                {"t", "re_lambda", "im_lambda", "invariant", "invariant_cs", "expect_N0", "deviation"});
    double worst = 0.0;
    for (double t : times) {
      const auto p = phase_integrals(s.drive, t);
      const auto evolved = evolve(psi0, p, s.evolve);
      const auto v = invariant_on_state(evolved.state, p);
      const cplx lambda = invariant_lambda(p).lambda;
      const double dev = std::max(std::abs(v.k_form - coh.n_mean), std::abs(v.cs_form - coh.n_mean));
      worst = std::max(worst, dev);
      csv.row({t, lambda.real(), lambda.imag(), v.k_form, v.cs_form, coh.n_mean, dev});
    }
    res.summary["invariant"] = {{"max_deviation", worst}, {"constant_within_1e-7", worst < 1e-7}};
    res.files.push_back(path);
  }

  if (s.wants(Output::classical)) {
    const auto ensemble = moment_matched_ensemble(psi0, s.classical_samples, s.seed, s.delta);
    const auto epath = out_dir / "ensemble.csv";
    {
      CsvFile csv(epath, s, {"p", "q", "weight"}, fmt::format("seed={}", s.seed));
      for (const auto& x : ensemble.samples()) csv.row({x.state.p, x.state.q, x.weight});
    }
    const auto path = out_dir / "classical.csv";
    CsvFile csv(path, s,
                {"t", "mean_N", "var_N", "mean_error", "expect_N_quantum", "var_N_quantum", "z"},
                fmt::format("seed={}", s.seed));
    double worst_z = 0.0;
    for (double t : times) {
      const auto p = phase_integrals(s.drive, t);
      const auto m = ensemble_moments(ensemble, p, s.delta);
      const double qn = expect_N(coh, p);
      const double z = m.mean_error > 0.0 ? (m.mean_N - qn) / m.mean_error : 0.0;
      worst_z = std::max(worst_z, std::abs(z));
      csv.row({t, m.mean_N, m.var_N, m.mean_error, qn, variance_N_covariance(coh, p), z});
    }
    res.summary["classical"] = {
        {"samples", s.classical_samples}, {"seed", s.seed}, {"max_abs_z", worst_z}};
    res.files.push_back(epath);
    res.files.push_back(path);
  }

  if (s.wants(Output::localization_report)) {
    const auto report = localization_report(s.drive, coh);
    const auto path = out_dir / "localization.json";
    json j = header(s, "localization_report");
    j["report"] = localization_json(report);
    write_json(path, j);
    res.summary["localization"] = j["report"];
    res.files.push_back(path);
  }

  if (s.oracle.enabled) {
    const auto rows = oracle_series(s, psi0, times);
    res.summary["oracle"] = oracle_summary(s, rows);
    if (!res.summary["oracle"]["pass"].get<bool>()) res.exit_code = kExitOracleDivergence;
  } else {
    res.summary["oracle"] = {{"enabled", false}};
  }

  json files = json::array();
  for (const auto& f : res.files) files.push_back(fs::relative(f, out_dir).string());
  res.summary["files"] = files;
  write_json(out_dir / "summary.json", res.summary);
  res.files.push_back(out_dir / "summary.json");
  return res;
}

CommandResult compare_with_oracle(const Scenario& s, const fs::path& out_dir) {
  if (!s.oracle.enabled) {
    throw ConfigError("compare needs [oracle] enabled = true", "oracle.enabled");
  }
  ensure_dir(out_dir);
  CommandResult res;
  const auto psi0 = s.initial_state();
  const auto rows = oracle_series(s, psi0, s.time.times());

  const auto path = out_dir / "compare.csv";
  std::vector<std::string> cols = {"t",        "max_amplitude_deviation", "expect_N_closed",
                                   "expect_N_oracle", "var_N_closed",     "var_N_oracle",
                                   "leaked",   "norm_drift"};
  if (s.dispersion) cols.push_back("alternate_convention_deviation");
  {
    CsvFile csv(path, s, cols);
    for (const auto& r : rows) {
      std::vector<double> v = {r.t,          r.amplitude_deviation, r.n_closed, r.n_oracle,
                               r.var_closed, r.var_oracle,          r.leaked,   r.norm_drift};
      if (s.dispersion) v.push_back(r.alternate_deviation);
      csv.row(v);
    }
  }
  res.files.push_back(path);

  res.summary = header(s, "compare");
  res.summary["oracle"] = oracle_summary(s, rows);
  const bool pass = res.summary["oracle"]["pass"].get<bool>();
  res.exit_code = pass ? 0 : kExitOracleDivergence;
  write_json(out_dir / "compare.json", res.summary);
  res.files.push_back(out_dir / "compare.json");

  std::string table = fmt::format("{:>12} {:>14} {:>14} {:>14}\n", "t", "max|dc|", "d<N>", "dVar N");
  const std::size_t stride = std::max<std::size_t>(1, rows.size() / 20);
  for (std::size_t i = 0; i < rows.size(); i += stride) {
    const auto& r = rows[i];
    table += fmt::format("{:>12.6g} {:>14.3e} {:>14.3e} {:>14.3e}\n", r.t, r.amplitude_deviation,
                         std::abs(r.n_closed - r.n_oracle), std::abs(r.var_closed - r.var_oracle));
  }
  const auto& o = res.summary["oracle"];
  table += fmt::format("max amplitude deviation {:.3e} (tolerance {:.1e}): {}\n",
                       o["max_amplitude_deviation"].get<double>(), s.oracle.tolerance,
                       pass ? "PASS" : "FAIL");
  if (s.dispersion) {
    table += fmt::format("alternate commutator convention deviates by {:.3e}\n",
                         o["alternate_convention_max_deviation"].get<double>());
  }
  res.report = table;
  return res;
}

CommandResult run_band(const Scenario& s, const fs::path& out_dir) {
  if (s.dispersion) throw ConfigError("band needs a nearest-neighbour scenario (no [band])", "band");
  ensure_dir(out_dir);
  CommandResult res;
  const auto band = quasienergy_band(s.drive);
  const auto drift = drift_rate(s.drive);
  res.summary = header(s, "band");
  res.summary["order"] = band.order;
  res.summary["period"] = band.period;
  res.summary["re_amplitude"] = band.amplitude.real();
  res.summary["im_amplitude"] = band.amplitude.imag();
  res.summary["bandwidth"] = band.bandwidth();
  res.summary["gamma"] = drift.gamma;

  const auto path = out_dir / "band.csv";
  {
    CsvFile csv(path, s, {"kappa", "epsilon"});
    for (double k : bloch_grid(s.band_points)) csv.row({k, band.energy(k)});
  }
  res.files.push_back(path);
  res.report = fmt::format("order {} bandwidth {:.12g} (2|gamma| = {:.12g})\n", band.order,
                           band.bandwidth(), 2.0 * std::abs(drift.gamma));

  if (s.oracle.enabled) {
    const auto spec = monodromy_spectrum(s.drive, s.ring_sites, s.oracle.config);
    const auto mpath = out_dir / "band_monodromy.csv";
    CsvFile csv(mpath, s, {"kappa", "epsilon_closed", "epsilon_oracle", "deviation"},
                fmt::format("ring_sites={}", s.ring_sites));
    const double zone = kTwoPi / spec.period;
    double worst = 0.0;
    double lo = 1e300, hi = -1e300;
    for (std::size_t j = 0; j < spec.kappa.size(); ++j) {
      const double closed = band.energy(spec.kappa[j]);
      double d = spec.quasienergy[j] - closed;
      d -= zone * std::floor(d / zone + 0.5);
      worst = std::max(worst, std::abs(d));
      lo = std::min(lo, spec.quasienergy[j]);
      hi = std::max(hi, spec.quasienergy[j]);
      csv.row({spec.kappa[j], closed, spec.quasienergy[j], std::abs(d)});
    }
    res.files.push_back(mpath);
    res.summary["monodromy"] = {{"ring_sites", s.ring_sites},
                                {"max_deviation", worst},
                                {"unitarity_error", spec.unitarity_error},
                                {"off_diagonal", spec.off_diagonal},
                                {"spectral_width", hi - lo},
                                {"pass", worst <= kBandTolerance}};
    res.report += fmt::format("ring L={} max |eps_oracle - eps_closed| = {:.3e}\n", s.ring_sites, worst);
  }
  write_json(out_dir / "band.json", res.summary);
  res.files.push_back(out_dir / "band.json");
  return res;
}

CommandResult run_localization_map(const Scenario& s, const fs::path& out_dir) {
  const auto* h = std::get_if<HarmonicDrive>(&s.drive.variant());
  if (!h || s.dispersion) {
    throw ConfigError("localization-map needs a harmonic drive", "drive.kind");
  }
  const auto res0 = s.drive.resonance();
  if (!res0) throw ConfigError("localization-map needs f0 to be an integer multiple of omega", "drive.f0");
  ensure_dir(out_dir);
  CommandResult res;
  const auto path = out_dir / "localization_map.csv";
  {
    CsvFile csv(path, s, {"ratio", "f1", "gamma", "re_amplitude", "im_amplitude", "localized"},
                fmt::format("order={}", res0->order));
    for (int i = 0; i < s.map_points; ++i) {
      const double ratio =
          s.map_ratio_min + (s.map_ratio_max - s.map_ratio_min) * i / (s.map_points - 1);
      const auto p = DriveProtocol::harmonic(h->f0, ratio * h->omega, h->omega, h->g0);
      const auto d = drift_rate(p);
      csv.row({ratio, ratio * h->omega, d.gamma, d.amplitude.real(), d.amplitude.imag(),
               std::abs(d.gamma) < kLocalizationThreshold ? 1.0 : 0.0});
    }
  }
  res.files.push_back(path);
  res.summary = header(s, "localization-map");
  res.summary["order"] = res0->order;
  json zeros = json::array();
  if (res0->order <= 50) {
    for (int k = 1; k <= 50; ++k) {
      const double z = bessel_zero(res0->order, k);
      if (z > s.map_ratio_max) break;
      if (z >= s.map_ratio_min) zeros.push_back(z);
    }
  }
  res.summary["localization_ratios"] = zeros;
  write_json(out_dir / "localization_map.json", res.summary);
  res.files.push_back(out_dir / "localization_map.json");
  return res;
}

}  // namespace tbdyn
