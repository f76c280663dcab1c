#include "tbdyn/propagator.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "tbdyn/bessel.hpp"
#include "tbdyn/error.hpp"

namespace tbdyn {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBesselTail = 1e-16;

void check_leak(double leaked, const EvolveOptions& options) {
  if (leaked > options.leak_tolerance) {
    throw LeakError(fmt::format("probability {:.3e} left the window (tolerance {:.1e})", leaked,
                                options.leak_tolerance),
                    leaked);
  }
}

// J_m(x) for m = -C..C (index m + C).
std::vector<double> symmetric_bessel(double x, int& C) {
  C = bessel_cutoff(x, kBesselTail);
  const auto j = bessel_j_range(C, x);
  std::vector<double> out(2 * C + 1);
  for (int m = 0; m <= C; ++m) {
    out[C + m] = j[m];
    out[C - m] = (m % 2 == 0) ? j[m] : -j[m];
  }
  return out;
}

// Multiplies by e^{-i eta n} and advances the ring twist accordingly.
LatticeState apply_field_phase(const Window& w, std::vector<cplx> amps, Boundary b, double twist,
                               double eta) {
  for (int i = 0; i < w.size(); ++i) amps[i] *= std::polar(1.0, -eta * (w.n_min + i));
  double new_twist = twist;
  if (b == Boundary::ring) new_twist = std::remainder(twist - w.size() * eta, kTwoPi);
  return {w, std::move(amps), b, new_twist};
}

template <class Phase>
EvolveResult evolve_in_bloch_space(const LatticeState& state, double eta, int spread,
                                   const Phase& phase, const EvolveOptions& options) {
  const Window w = state.window();
  const int L = w.size();

  if (state.boundary() == Boundary::ring) {
    // Twisted ring momenta kappa_j = (twist + 2 pi j) / L diagonalise K exactly.
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(L));
    std::vector<cplx> out(L);
    const auto amps = state.amplitudes();
    for (int j = 0; j < L; ++j) {
      const double kappa = (state.twist() + kTwoPi * j) / L;
      cplx psi{};
      for (int i = 0; i < L; ++i) psi += amps[i] * std::polar(1.0, -kappa * (w.n_min + i));
      psi *= inv_sqrt * phase(kappa);
      for (int i = 0; i < L; ++i) out[i] += psi * std::polar(1.0, kappa * (w.n_min + i));
    }
    for (auto& c : out) c *= inv_sqrt;
    return {apply_field_phase(w, std::move(out), Boundary::ring, state.twist(), eta), 0.0};
  }

  int M = options.bloch_points;
  if (M == 0) {
    M = L + 2 * spread + 16;
  } else if (M < L) {
    throw DomainError(fmt::format("Bloch grid of {} points aliases a window of {} sites", M, L));
  }
  if (M % 2 != 0) ++M;
  const int pad = (M - L) / 2;
  const Window wide{w.n_min - pad, w.n_min - pad + M - 1};
  std::vector<cplx> embedded(M);
  for (int i = 0; i < L; ++i) embedded[pad + i] = state.amplitudes()[i];

  auto bloch = bloch_transform(LatticeState(wide, std::move(embedded)), M);
  for (std::size_t j = 0; j < bloch.points(); ++j) bloch.values[j] *= phase(bloch.kappa[j]);
  const auto spread_state = inverse_bloch(bloch, wide);

  std::vector<cplx> out(L);
  double leaked = 0.0;
  for (int i = 0; i < M; ++i) {
    const cplx c = spread_state.amplitudes()[i];
    if (i >= pad && i < pad + L) {
      out[i - pad] = c;
    } else {
      leaked += std::norm(c);
    }
  }
  check_leak(leaked, options);
  return {apply_field_phase(w, std::move(out), Boundary::open, 0.0, eta), leaked};
}

EvolveResult evolve_site_space(const LatticeState& state, const PhaseIntegrals& phase,
                               const EvolveOptions& options) {
  int C = 0;
  const auto j = symmetric_bessel(2.0 * phase.chi_abs(), C);
  // U_R = sum_m J_m(2|chi|) e^{-i m (phi + pi/2)} K^m,  (K^m psi)_n = psi_{n+m}
  const double theta = phase.phi() + kHalfPi;
  std::vector<cplx> weights(2 * C + 1);
  for (int m = -C; m <= C; ++m) weights[m + C] = j[m + C] * std::polar(1.0, -m * theta);

  const Window w = state.window();
  std::vector<cplx> out(w.size());
  for (int i = 0; i < w.size(); ++i) {
    const int n = w.n_min + i;
    cplx s{};
    for (int m = -C; m <= C; ++m) {
      const double jm = j[m + C];
      if (jm == 0.0) continue;
      const cplx c = state.at(n + m);
      if (c != cplx{}) s += weights[m + C] * c;
    }
    out[i] = s;
  }

  double leaked = 0.0;
  if (state.boundary() == Boundary::open) {
    double kept = 0.0;
    for (const auto& c : out) kept += std::norm(c);
    leaked = std::max(0.0, state.norm_squared() - kept);
    check_leak(leaked, options);
  }
  return {apply_field_phase(w, std::move(out), state.boundary(), state.twist(), phase.eta), leaked};
}

}  // namespace

SingleBandDispersion::SingleBandDispersion(std::vector<cplx> couplings)
    : couplings_(std::move(couplings)) {
  if (couplings_.size() < 2) {
    throw DomainError("a single-band dispersion needs couplings g_0 .. g_M with M >= 1");
  }
  for (const auto& g : couplings_) {
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag())) {
      throw DomainError("non-finite dispersion coupling");
    }
  }
}

SingleBandDispersion SingleBandDispersion::tight_binding(double g) {
  return SingleBandDispersion({cplx{}, cplx{g, 0.0}});
}

double SingleBandDispersion::energy(double kappa) const {
  double e = 0.0;
  for (std::size_t m = 0; m < couplings_.size(); ++m) {
    e += 2.0 * (couplings_[m] * std::polar(1.0, static_cast<double>(m) * kappa)).real();
  }
  return e;
}

double commutator_factor(int m, CommutatorConvention convention) {
  if (m <= 0) return 0.0;
  return convention == CommutatorConvention::ladder ? static_cast<double>(m)
                                                    : std::ldexp(1.0, m - 1);
}

PropagatorParams propagator_params(const SingleBandDispersion& dispersion,
                                   const DriveProtocol& field, double t,
                                   CommutatorConvention convention) {
  PropagatorParams p;
  p.eta = eta(field, t);
  const auto& g = dispersion.couplings();
  p.chi.resize(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) {
    if (g[m] == cplx{}) continue;
    const double factor = commutator_factor(static_cast<int>(m), convention);
    p.chi[m] = g[m] * chi(field.field_phase_protocol(factor), t);
  }
  return p;
}

cplx element(const PhaseIntegrals& phase, int n, int n_prime) {
  const int d = n_prime - n;
  return std::polar(1.0, -d * (phase.phi() + kHalfPi) - n * phase.eta) *
         bessel_j(d, 2.0 * phase.chi_abs());
}

cplx element(const DriveProtocol& protocol, double t, int n, int n_prime) {
  return element(phase_integrals(protocol, t), n, n_prime);
}

EvolveResult evolve(const LatticeState& state, const PhaseIntegrals& phase,
                    const EvolveOptions& options) {
  if (options.method == EvolveMethod::site) return evolve_site_space(state, phase, options);
  const double a = 2.0 * phase.chi_abs();
  const double phi = phase.phi();
  auto hop = [a, phi](double kappa) { return std::polar(1.0, -a * std::cos(kappa - phi)); };
  return evolve_in_bloch_space(state, phase.eta, bessel_cutoff(a, kBesselTail), hop, options);
}

EvolveResult evolve(const LatticeState& state, const DriveProtocol& protocol, double t,
                    const EvolveOptions& options) {
  return evolve(state, phase_integrals(protocol, t), options);
}

cplx bloch_phase(const DriveProtocol& protocol, double t, double kappa) {
  const cplx c = chi(protocol, t);
  return std::polar(1.0, -2.0 * std::abs(c) * std::cos(kappa + std::arg(c)));
}

cplx bloch_phase(const PropagatorParams& params, double kappa) {
  double f_re = 0.0;
  for (std::size_t m = 0; m < params.chi.size(); ++m) {
    f_re += (params.chi[m] * std::polar(1.0, static_cast<double>(m) * kappa)).real();
  }
  return std::polar(1.0, -2.0 * f_re);
}

EvolveResult evolve_single_band(const LatticeState& state, const SingleBandDispersion& dispersion,
                                const DriveProtocol& field, double t, const EvolveOptions& options,
                                CommutatorConvention convention) {
  const auto params = propagator_params(dispersion, field, t, convention);
  int spread = 0;
  for (std::size_t m = 1; m < params.chi.size(); ++m) {
    spread += static_cast<int>(m) * bessel_cutoff(2.0 * std::abs(params.chi[m]), kBesselTail);
  }
  auto hop = [&params](double kappa) { return bloch_phase(params, kappa); };
  return evolve_in_bloch_space(state, params.eta, spread, hop, options);
}

}  // namespace tbdyn
