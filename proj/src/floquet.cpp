#include "tbdyn/floquet.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "tbdyn/error.hpp"

namespace tbdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

LatticeState bloch_wave(double kappa_t, cplx factor, Window window, Boundary boundary,
                        HoustonNorm norm) {
  const double scale = norm == HoustonNorm::bloch ? 1.0 / std::sqrt(kTwoPi)
                                                  : 1.0 / std::sqrt(double(window.size()));
  std::vector<cplx> amps(window.size());
  for (int n = window.n_min; n <= window.n_max; ++n) {
    amps[n - window.n_min] = scale * factor * std::polar(1.0, n * kappa_t);
  }
  const double twist =
      boundary == Boundary::ring ? std::remainder(window.size() * kappa_t, kTwoPi) : 0.0;
  return {window, std::move(amps), boundary, twist};
}

}  // namespace

double QuasienergyBand::energy(double kappa) const {
  return 2.0 * (amplitude * std::polar(1.0, kappa)).real();
}

QuasienergyBand quasienergy_band(const DriveProtocol& protocol) {
  const auto res = protocol.resonance();
  if (!res) {
    throw DomainError(
        fmt::format("quasienergies need a resonant periodic drive, got {}", protocol.describe()));
  }
  return {res->order, res->period, fourier_amplitude(protocol, res->order)};
}

double quasienergy(const DriveProtocol& protocol, double kappa) {
  return quasienergy_band(protocol).energy(kappa);
}

LatticeState houston_state(double kappa, const DriveProtocol& protocol, double t, Window window,
                           Boundary boundary, HoustonNorm norm) {
  const double e = eta(protocol, t);
  const cplx x = chi(protocol, t);
  const double phase = 2.0 * (x * std::polar(1.0, kappa)).real();
  return bloch_wave(kappa - e, std::polar(1.0, -phase), window, boundary, norm);
}

LatticeState floquet_state(double kappa, const DriveProtocol& protocol, double t, Window window,
                           Boundary boundary, HoustonNorm norm) {
  const double eps = quasienergy(protocol, kappa);
  const double e = eta(protocol, t);
  const cplx x = chi(protocol, t);
  const double phase = 2.0 * (x * std::polar(1.0, kappa)).real() - eps * t;
  return bloch_wave(kappa - e, std::polar(1.0, -phase), window, boundary, norm);
}

InvariantCoefficients invariant_lambda(const PhaseIntegrals& phase) {
  return {phase.t, 1.0, cplx(0.0, -1.0) * std::polar(1.0, phase.eta) * phase.chi};
}

InvariantCoefficients invariant_lambda(const DriveProtocol& protocol, double t) {
  return invariant_lambda(phase_integrals(protocol, t));
}

InvariantValue invariant_on_state(const LatticeState& state_t, const PhaseIntegrals& phase) {
  const auto [n_mean, n2_mean] = position_moments(state_t);
  (void)n2_mean;
  const double norm = state_t.norm_squared();
  const cplx k = shift_moment(state_t, 1) / norm;
  const double n = n_mean / norm;
  const cplx lambda = invariant_lambda(phase).lambda;

  InvariantValue v;
  v.k_form = n + 2.0 * (lambda * k).real();
  const double s = std::sin(phase.eta);
  const double c = std::cos(phase.eta);
  v.cs_form = n + (phase.u * s - phase.v * c) * k.real() + (phase.u * c + phase.v * s) * k.imag();
  return v;
}

InvariantValue invariant_expectation(const LatticeState& state0, const DriveProtocol& protocol,
                                     double t, const EvolveOptions& options) {
  const auto phase = phase_integrals(protocol, t);
  const auto evolved = evolve(state0, phase, options);
  auto v = invariant_on_state(evolved.state, phase);
  v.leaked = evolved.leaked;
  return v;
}

}  // namespace tbdyn
