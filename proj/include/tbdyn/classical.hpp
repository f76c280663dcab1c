#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tbdyn/drive.hpp"
#include "tbdyn/lattice.hpp"

namespace tbdyn {

/// Phase-space point of the classical model H = 2 g cos(p delta) + f q.
/// q is measured in lattice sites; p delta is dimensionless.
struct ClassicalState {
  double p = 0.0;
  double q = 0.0;
};

struct WeightedSample {
  ClassicalState state;
  double weight = 0.0;
};

class ClassicalEnsemble {
 public:
  /// Weights must be non-negative and sum to 1 within 1e-12.
  explicit ClassicalEnsemble(std::vector<WeightedSample> samples);

  /// Equal weights.
  static ClassicalEnsemble uniform(const std::vector<ClassicalState>& points);

  const std::vector<WeightedSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }

 private:
  std::vector<WeightedSample> samples_;
};

/// Closed-form trajectory: p_t delta = p_0 delta - eta_t,
/// q_t = q_0 + v_t cos(p_0 delta) - u_t sin(p_0 delta).
ClassicalState trajectory(const ClassicalState& s0, const PhaseIntegrals& phase, double delta = 1.0);
ClassicalState trajectory(const ClassicalState& s0, const DriveProtocol& protocol, double t,
                          double delta = 1.0);

/// Classical RK4 integration of p' = -f/delta, q' = -2 g sin(p delta) with `steps` steps.
ClassicalState integrate_trajectory(const ClassicalState& s0, const DriveProtocol& protocol,
                                    double t, int steps, double delta = 1.0);

struct EnsembleMoments {
  double mean_N = 0.0;
  double var_N = 0.0;
  /// Standard error of mean_N, sqrt(var_N / effective sample size).
  double mean_error = 0.0;
};

/// Throws DomainError for an empty ensemble.
EnsembleMoments ensemble_moments(const ClassicalEnsemble& ensemble, const DriveProtocol& protocol,
                                 double t, double delta = 1.0);
EnsembleMoments ensemble_moments(const ClassicalEnsemble& ensemble, const PhaseIntegrals& phase,
                                 double delta = 1.0);

/// Equal-weight ensemble whose (C, S, N) first and second moments match the quantum state.
/// p delta is drawn from the discrete momentum distribution |psi(kappa_j)|^2 on a grid
/// fine enough that every trigonometric moment up to second order is exact; q is built as
/// <N> + alpha (C - <C>) + beta (S - <S>) + sigma xi with xi standard normal.
ClassicalEnsemble moment_matched_ensemble(const LatticeState& state, std::size_t samples,
                                          std::uint64_t seed, double delta = 1.0);

/// I(p, q, t) = q + (u sin eta - v cos eta) cos(p delta) + (u cos eta + v sin eta) sin(p delta).
double classical_invariant(const ClassicalState& s, const PhaseIntegrals& phase, double delta = 1.0);
double classical_invariant(const ClassicalState& s, const DriveProtocol& protocol, double t,
                           double delta = 1.0);

}  // namespace tbdyn
