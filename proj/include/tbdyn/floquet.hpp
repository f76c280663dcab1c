#pragma once

#include "tbdyn/drive.hpp"
#include "tbdyn/lattice.hpp"
#include "tbdyn/propagator.hpp"

namespace tbdyn {

/// Quasienergy band eps_kappa = a_n e^{i kappa} + conj(a_n) e^{-i kappa} of a resonant drive.
struct QuasienergyBand {
  int order = 0;
  double period = 0.0;
  cplx amplitude;

  double energy(double kappa) const;
  double bandwidth() const { return 4.0 * std::abs(amplitude); }
  /// arg a_n.
  double phase() const { return std::arg(amplitude); }
};

/// Throws DomainError for drives without an integer resonance.
QuasienergyBand quasienergy_band(const DriveProtocol& protocol);
double quasienergy(const DriveProtocol& protocol, double kappa);

enum class HoustonNorm {
  /// Per-site modulus (2 pi)^{-1/2}, as for the Bloch wave itself.
  bloch,
  /// Unit norm on the window (modulus L^{-1/2}).
  unit,
};

/// Evolved Bloch wave e^{i n kappa_t - i (chi_t e^{i kappa} + c.c.)} with kappa_t = kappa - eta_t.
/// On a ring the twist is L kappa_t, so K acts on it as multiplication by e^{i kappa_t}.
LatticeState houston_state(double kappa, const DriveProtocol& protocol, double t, Window window,
                           Boundary boundary = Boundary::ring, HoustonNorm norm = HoustonNorm::bloch);

/// e^{i eps_kappa t} times the Houston state; periodic in t with the drive period.
LatticeState floquet_state(double kappa, const DriveProtocol& protocol, double t, Window window,
                           Boundary boundary = Boundary::ring, HoustonNorm norm = HoustonNorm::bloch);

/// I(t) = N + lambda_t K + conj(lambda_t) K^dag (Schroedinger picture) with gamma fixed to 1.
struct InvariantCoefficients {
  double t = 0.0;
  double gamma = 1.0;
  cplx lambda;
};

InvariantCoefficients invariant_lambda(const DriveProtocol& protocol, double t);
InvariantCoefficients invariant_lambda(const PhaseIntegrals& phase);

struct InvariantValue {
  /// <N> + lambda <K> + conj(lambda) <K^dag>.
  double k_form = 0.0;
  /// <N> + (u sin eta - v cos eta) <C> + (u cos eta + v sin eta) <S>.
  double cs_form = 0.0;
  double leaked = 0.0;
};

/// Invariant expectation on a state already evolved to the time of `phase`.
InvariantValue invariant_on_state(const LatticeState& state_t, const PhaseIntegrals& phase);

/// Evolves `state0` with the closed-form propagator and evaluates the invariant.
/// Throws LeakError when the window loses more than options.leak_tolerance.
InvariantValue invariant_expectation(const LatticeState& state0, const DriveProtocol& protocol,
                                     double t, const EvolveOptions& options = {});

}  // namespace tbdyn
