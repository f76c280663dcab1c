#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tbdyn/drive.hpp"
#include "tbdyn/lattice.hpp"
#include "tbdyn/propagator.hpp"

namespace tbdyn {

// Closed-form Heisenberg-picture observables. Every function here works from t = 0
// coherence data and the phase integrals; no state is evolved.

cplx expect_K(const CoherenceParameters& coh, const PhaseIntegrals& phase);
cplx expect_K(const CoherenceParameters& coh, const DriveProtocol& protocol, double t);

/// |<K^2> - <K>^2|, which is constant in time.
double variance_K(const CoherenceParameters& coh);

/// <N>_t = <N>_0 + v_t <C>_0 - u_t <S>_0.
double expect_N(const CoherenceParameters& coh, const PhaseIntegrals& phase);
double expect_N(const CoherenceParameters& coh, const DriveProtocol& protocol, double t);
/// Same quantity as <N>_0 + 2 |K| |chi_t| sin(phi_t - arg K).
double expect_N_polar(const CoherenceParameters& coh, const PhaseIntegrals& phase);

/// Var N(t) from (K, J, L, <N>_0, <N^2>_0) in modulus/phase form.
double variance_N(const CoherenceParameters& coh, const PhaseIntegrals& phase);
double variance_N(const CoherenceParameters& coh, const DriveProtocol& protocol, double t);
/// Var N(t) from the C/S/N covariance matrix.
double variance_N_covariance(const CoherenceParameters& coh, const PhaseIntegrals& phase);

struct ObservableSeries {
  std::vector<PhaseIntegrals> phase;
  std::vector<cplx> expect_K;
  std::vector<double> expect_N;
  std::vector<double> var_N;
  std::vector<double> var_K;

  std::size_t size() const noexcept { return phase.size(); }
};

ObservableSeries observable_series(const CoherenceParameters& coh, const DriveProtocol& protocol,
                                   const std::vector<double>& times);

/// <N>_t for a single-band Hamiltonian:
/// <N>_0 + i sum_m c_m (chi_m <K^m>_0 - conj(chi_m) conj(<K^m>_0)).
/// `shift_moments[m]` holds <K^m>_0 for m = 0..M.
double expect_N_single_band(double n_mean, const std::vector<cplx>& shift_moments,
                            const PropagatorParams& params,
                            CommutatorConvention convention = CommutatorConvention::ladder);

enum class Mode { oscillating, breathing, mixed };
std::string to_string(Mode mode);

inline constexpr double kOscillatingCovarianceMax = 0.05;
inline constexpr double kBreathingMeanMax = 0.05;
inline constexpr double kBreathingCovarianceLow = 0.45;
inline constexpr double kBreathingCovarianceHigh = 0.55;

struct ModeReport {
  Mode mode = Mode::mixed;
  double mean_C = 0.0;
  double mean_S = 0.0;
  double cov_CC = 0.0;
  double cov_SS = 0.0;
  double cov_CS = 0.0;
  double cov_CN = 0.0;
  double cov_SN = 0.0;
  /// Cov(C,N) and Cov(S,N) vanish, so the simplified mode formulas hold.
  bool space_symmetric = false;
};

ModeReport classify_mode(const CoherenceParameters& coh);

struct LocalizationReport {
  int order = 0;
  double gamma = 0.0;
  cplx amplitude;
  /// gamma_n^2 Cov(S,S) when coherence data was supplied, gamma_n^2 otherwise.
  double variance_slope = 0.0;
  bool slope_uses_state = false;
  bool localized = false;
  /// Field amplitude is zero, so every gamma_n with n >= 1 vanishes trivially.
  bool degenerate = false;
  /// Bracketing zeros of J_n, as f1/omega values (harmonic drives only).
  std::optional<double> zero_below;
  std::optional<double> zero_above;
  std::optional<double> drive_ratio;
};

inline constexpr double kLocalizationThreshold = 1e-10;

LocalizationReport localization_report(const DriveProtocol& protocol,
                                       const std::optional<CoherenceParameters>& coh = std::nullopt);

}  // namespace tbdyn
