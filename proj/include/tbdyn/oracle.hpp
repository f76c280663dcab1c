#pragma once

#include <vector>

#include "tbdyn/drive.hpp"
#include "tbdyn/lattice.hpp"
#include "tbdyn/propagator.hpp"

namespace tbdyn {

/// Direct integration of i d/dt c = H c on the state's own window (open or twisted ring).
struct OracleConfig {
  /// Initial (adaptive) or fixed step; 0 picks T_B / 2000, or 2 pi / 2000 without a dc field.
  double dt = 0.0;
  /// Step-doubling error control; when false every step has size dt (rounded to hit t).
  bool adaptive = true;
  /// Accepted local error per unit time, in the Euclidean amplitude norm.
  double tolerance = 1e-11;
  /// Largest probability allowed in the outer edge layer of an open window.
  double leak_tolerance = 1e-8;
  /// Sites at each open edge counted as leaked mass.
  int edge_layer = 4;
  double min_dt = 1e-10;
};

struct OracleResult {
  LatticeState state;
  /// Largest edge-layer mass seen during the run (open windows).
  double leaked = 0.0;
  /// | |c(t)|^2 - |c(0)|^2 |.
  double norm_drift = 0.0;
  /// Accumulated step-doubling error estimate.
  double error_estimate = 0.0;
  long steps = 0;
};

/// Integrates H_t = g_t (K + K^dag) + f_t N from t0 to t1.
/// Throws LeakError when the edge layer holds more than leak_tolerance and
/// ConvergenceError when the step size underflows.
OracleResult integrate(const LatticeState& state0, const DriveProtocol& protocol, double t0,
                       double t1, const OracleConfig& config = {});
OracleResult integrate(const LatticeState& state0, const DriveProtocol& protocol, double t,
                       const OracleConfig& config = {});

/// Integrates H_t = sum_m (g_m K^m + conj(g_m) K^{dag m}) + f_t N, taking f_t from `field`.
OracleResult integrate(const LatticeState& state0, const SingleBandDispersion& dispersion,
                       const DriveProtocol& field, double t0, double t1,
                       const OracleConfig& config = {});
OracleResult integrate(const LatticeState& state0, const SingleBandDispersion& dispersion,
                       const DriveProtocol& field, double t, const OracleConfig& config = {});

struct MonodromySpectrum {
  double period = 0.0;
  /// Ring momenta 2 pi j / L mapped into [-pi, pi).
  std::vector<double> kappa;
  /// -arg <kappa|U(T)|kappa> / T, wrapped into [-pi/T, pi/T).
  std::vector<double> quasienergy;
  /// || U^dag U - 1 ||_2.
  double unitarity_error = 0.0;
  /// Largest off-diagonal modulus of U(T) in the Bloch basis.
  double off_diagonal = 0.0;
};

/// Builds U(T) on an L-site ring column by column and reads off its Bloch-basis phases.
/// Throws DomainError for non-resonant drives or L < 8, ConvergenceError when
/// U(T) is not unitary to 1e-7.
MonodromySpectrum monodromy_spectrum(const DriveProtocol& protocol, int ring_sites,
                                     const OracleConfig& config = {});

}  // namespace tbdyn
