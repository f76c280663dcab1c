#pragma once

#include <complex>
#include <vector>

#include "tbdyn/drive.hpp"
#include "tbdyn/lattice.hpp"

namespace tbdyn {

/// Hopping amplitudes g_m (m = 0..M) of a single band with dispersion
/// E(kappa) = sum_m (g_m e^{i m kappa} + conj(g_m) e^{-i m kappa}).
class SingleBandDispersion {
 public:
  explicit SingleBandDispersion(std::vector<cplx> couplings);

  /// Nearest-neighbour band: g_1 = g, all others zero.
  static SingleBandDispersion tight_binding(double g);

  const std::vector<cplx>& couplings() const noexcept { return couplings_; }
  int modes() const noexcept { return static_cast<int>(couplings_.size()) - 1; }
  double energy(double kappa) const;

 private:
  std::vector<cplx> couplings_;
};

/// How the field phase enters the m-th hopping term, e^{-i c_m eta}.
/// `ladder` uses c_m = m, which follows from K^m |n> = |n - m>.
/// `power_of_two` uses c_m = 2^{m-1}; it is kept only to demonstrate its disagreement
/// with direct integration for m >= 3.
enum class CommutatorConvention { ladder, power_of_two };

double commutator_factor(int m, CommutatorConvention convention);

/// eta_t and chi_m(t) = g_m int_0^t exp(-i c_m eta_tau) d tau for m = 0..M.
struct PropagatorParams {
  double eta = 0.0;
  std::vector<cplx> chi;
};

PropagatorParams propagator_params(const SingleBandDispersion& dispersion,
                                   const DriveProtocol& field, double t,
                                   CommutatorConvention convention = CommutatorConvention::ladder);

/// U_{nn'}(t) = exp(-i (n'-n)(phi_t + pi/2) - i n eta_t) J_{n'-n}(2 |chi_t|).
cplx element(const DriveProtocol& protocol, double t, int n, int n_prime);
cplx element(const PhaseIntegrals& phase, int n, int n_prime);

enum class EvolveMethod {
  /// Bessel-weighted sum of shifted amplitudes followed by e^{-i eta N}.
  site,
  /// Diagonal phase on a Bloch grid followed by e^{-i eta N}.
  bloch,
};

struct EvolveOptions {
  EvolveMethod method = EvolveMethod::site;
  /// Largest probability allowed to leave an open window.
  double leak_tolerance = 1e-8;
  /// Bloch grid size for open windows; 0 picks an even size that cannot alias.
  int bloch_points = 0;
};

struct EvolveResult {
  LatticeState state;
  double leaked = 0.0;
};

EvolveResult evolve(const LatticeState& state, const DriveProtocol& protocol, double t,
                    const EvolveOptions& options = {});
EvolveResult evolve(const LatticeState& state, const PhaseIntegrals& phase,
                    const EvolveOptions& options = {});

/// e^{-2 i |chi_t| cos(kappa - phi_t)}: action of the hopping factor on |kappa>.
cplx bloch_phase(const DriveProtocol& protocol, double t, double kappa);
/// e^{-i (f + conj f)} with f = sum_m chi_m e^{i m kappa}.
cplx bloch_phase(const PropagatorParams& params, double kappa);

/// Evolution under the single-band Hamiltonian with field f_t taken from `field`
/// (its hopping is ignored). Reduces to `evolve` for a nearest-neighbour band.
EvolveResult evolve_single_band(const LatticeState& state, const SingleBandDispersion& dispersion,
                                const DriveProtocol& field, double t,
                                const EvolveOptions& options = {},
                                CommutatorConvention convention = CommutatorConvention::ladder);

}  // namespace tbdyn
