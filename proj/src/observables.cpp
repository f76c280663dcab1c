#include "tbdyn/observables.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tbdyn/bessel.hpp"
#include "tbdyn/error.hpp"

namespace tbdyn {

cplx expect_K(const CoherenceParameters& coh, const PhaseIntegrals& phase) {
  return std::polar(1.0, -phase.eta) * coh.K;
}

cplx expect_K(const CoherenceParameters& coh, const DriveProtocol& protocol, double t) {
  return std::polar(1.0, -eta(protocol, t)) * coh.K;
}

double variance_K(const CoherenceParameters& coh) { return std::abs(coh.L - coh.K * coh.K); }

double expect_N(const CoherenceParameters& coh, const PhaseIntegrals& phase) {
  return coh.n_mean + phase.v * coh.mean_C() - phase.u * coh.mean_S();
}

double expect_N(const CoherenceParameters& coh, const DriveProtocol& protocol, double t) {
  return expect_N(coh, phase_integrals(protocol, t));
}

double expect_N_polar(const CoherenceParameters& coh, const PhaseIntegrals& phase) {
  return coh.n_mean +
         2.0 * std::abs(coh.K) * phase.chi_abs() * std::sin(phase.phi() - std::arg(coh.K));
}

double variance_N(const CoherenceParameters& coh, const PhaseIntegrals& phase) {
  const double x = phase.chi_abs();
  const double phi = phase.phi();
  const double k_abs = std::abs(coh.K);
  const double s_k = std::sin(phi - std::arg(coh.K));
  const double quad = 1.0 - std::abs(coh.L) * std::cos(2.0 * phi - std::arg(coh.L)) -
                      2.0 * k_abs * k_abs * s_k * s_k;
  const double lin =
      std::abs(coh.J) * std::sin(phi - std::arg(coh.J)) - 2.0 * coh.n_mean * k_abs * s_k;
  return coh.variance_N() + 2.0 * x * x * quad + 2.0 * x * lin;
}

double variance_N(const CoherenceParameters& coh, const DriveProtocol& protocol, double t) {
  return variance_N(coh, phase_integrals(protocol, t));
}

double variance_N_covariance(const CoherenceParameters& coh, const PhaseIntegrals& phase) {
  const auto& c = coh.covariance;
  const double u = phase.u;
  const double v = phase.v;
  return c[kN][kN] + 2.0 * v * c[kC][kN] - 2.0 * u * c[kS][kN] + v * v * c[kC][kC] +
         u * u * c[kS][kS] - 2.0 * u * v * c[kC][kS];
}

ObservableSeries observable_series(const CoherenceParameters& coh, const DriveProtocol& protocol,
                                   const std::vector<double>& times) {
  ObservableSeries s;
  s.phase.reserve(times.size());
  const double var_k = variance_K(coh);
  for (double t : times) {
    const auto ph = phase_integrals(protocol, t);
    s.phase.push_back(ph);
    s.expect_K.push_back(expect_K(coh, ph));
    s.expect_N.push_back(expect_N(coh, ph));
    s.var_N.push_back(variance_N_covariance(coh, ph));
    s.var_K.push_back(var_k);
  }
  return s;
}

double expect_N_single_band(double n_mean, const std::vector<cplx>& shift_moments,
                            const PropagatorParams& params, CommutatorConvention convention) {
  if (shift_moments.size() < params.chi.size()) {
    throw DomainError(fmt::format("need {} shift moments, got {}", params.chi.size(),
                                  shift_moments.size()));
  }
  double n = n_mean;
  for (std::size_t m = 1; m < params.chi.size(); ++m) {
    const double c = commutator_factor(static_cast<int>(m), convention);
    n -= 2.0 * c * (params.chi[m] * shift_moments[m]).imag();
  }
  return n;
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::oscillating:
      return "oscillating";
    case Mode::breathing:
      return "breathing";
    case Mode::mixed:
      break;
  }
  return "mixed";
}

ModeReport classify_mode(const CoherenceParameters& coh) {
  const auto& c = coh.covariance;
  ModeReport r;
  r.mean_C = coh.mean_C();
  r.mean_S = coh.mean_S();
  r.cov_CC = c[kC][kC];
  r.cov_SS = c[kS][kS];
  r.cov_CS = c[kC][kS];
  r.cov_CN = c[kC][kN];
  r.cov_SN = c[kS][kN];
  r.space_symmetric = std::abs(r.cov_CN) < 1e-8 && std::abs(r.cov_SN) < 1e-8;

  auto in_band = [](double v) {
    return v >= kBreathingCovarianceLow && v <= kBreathingCovarianceHigh;
  };
  if (r.cov_CC < kOscillatingCovarianceMax && r.cov_SS < kOscillatingCovarianceMax &&
      std::abs(r.cov_CS) < kOscillatingCovarianceMax) {
    r.mode = Mode::oscillating;
  } else if (std::abs(r.mean_C) < kBreathingMeanMax && std::abs(r.mean_S) < kBreathingMeanMax &&
             in_band(r.cov_CC) && in_band(r.cov_SS)) {
    r.mode = Mode::breathing;
  } else {
    r.mode = Mode::mixed;
  }
  return r;
}

LocalizationReport localization_report(const DriveProtocol& protocol,
                                       const std::optional<CoherenceParameters>& coh) {
  const auto drift = drift_rate(protocol);
  if (!drift.resonant) {
    throw DomainError(fmt::format("localization report needs a resonant drive, got {}",
                                  protocol.describe()));
  }
  LocalizationReport r;
  r.order = drift.order;
  r.gamma = drift.gamma;
  r.amplitude = drift.amplitude;
  r.localized = std::abs(drift.gamma) < kLocalizationThreshold;
  if (coh) {
    r.variance_slope = drift.gamma * drift.gamma * coh->covariance[kS][kS];
    r.slope_uses_state = true;
  } else {
    r.variance_slope = drift.gamma * drift.gamma;
  }

  if (const auto* h = std::get_if<HarmonicDrive>(&protocol.variant())) {
    const double x = std::abs(h->f1 / h->omega);
    r.drive_ratio = h->f1 / h->omega;
    r.degenerate = h->f1 == 0.0;
    if (r.order <= 50) {
      for (int k = 1; k <= 50; ++k) {
        const double z = bessel_zero(r.order, k);
        // A ratio within rounding of a zero counts as sitting on it.
        if (z <= x * (1.0 + 1e-12)) {
          r.zero_below = z;
        } else {
          r.zero_above = z;
          break;
        }
      }
    }
  } else if (const auto* f = std::get_if<FourierDrive>(&protocol.variant())) {
    r.degenerate = std::all_of(f->modes.begin(), f->modes.end(), [](double m) { return m == 0.0; });
  }
  return r;
}

}  // namespace tbdyn
