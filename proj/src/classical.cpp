#include "tbdyn/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "tbdyn/error.hpp"

namespace tbdyn {

ClassicalEnsemble::ClassicalEnsemble(std::vector<WeightedSample> samples)
    : samples_(std::move(samples)) {
  if (samples_.empty()) throw DomainError("classical ensemble is empty");
  double total = 0.0;
  for (const auto& s : samples_) {
    if (!(s.weight >= 0.0)) throw DomainError("ensemble weights must be non-negative");
    if (!std::isfinite(s.state.p) || !std::isfinite(s.state.q)) {
      throw DomainError("ensemble sample is not finite");
    }
    total += s.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError(fmt::format("ensemble weights sum to {:.15g}, not 1", total));
  }
}

ClassicalEnsemble ClassicalEnsemble::uniform(const std::vector<ClassicalState>& points) {
  if (points.empty()) throw DomainError("classical ensemble is empty");
  std::vector<WeightedSample> s;
  s.reserve(points.size());
  const double w = 1.0 / points.size();
  for (const auto& p : points) s.push_back({p, w});
  // Rounding in the weight sum grows with the sample count; renormalize the last weight.
  const double total = std::accumulate(s.begin(), s.end(), 0.0,
                                       [](double a, const WeightedSample& x) { return a + x.weight; });
  s.back().weight += 1.0 - total;
  return ClassicalEnsemble(std::move(s));
}

ClassicalState trajectory(const ClassicalState& s0, const PhaseIntegrals& phase, double delta) {
  const double pd = s0.p * delta;
  return {(pd - phase.eta) / delta, s0.q + phase.v * std::cos(pd) - phase.u * std::sin(pd)};
}

ClassicalState trajectory(const ClassicalState& s0, const DriveProtocol& protocol, double t,
                          double delta) {
  return trajectory(s0, phase_integrals(protocol, t), delta);
}

ClassicalState integrate_trajectory(const ClassicalState& s0, const DriveProtocol& protocol,
                                    double t, int steps, double delta) {
  if (steps < 1) throw DomainError("need at least one integration step");
  auto rhs = [&](double tau, const ClassicalState& s) {
    return ClassicalState{-protocol.f(tau) / delta, -2.0 * protocol.g(tau) * std::sin(s.p * delta)};
  };
  auto axpy = [](const ClassicalState& s, double a, const ClassicalState& d) {
    return ClassicalState{s.p + a * d.p, s.q + a * d.q};
  };
  const double h = t / steps;
  ClassicalState s = s0;
  for (int i = 0; i < steps; ++i) {
    const double tau = i * h;
    const auto k1 = rhs(tau, s);
    const auto k2 = rhs(tau + 0.5 * h, axpy(s, 0.5 * h, k1));
    const auto k3 = rhs(tau + 0.5 * h, axpy(s, 0.5 * h, k2));
    const auto k4 = rhs(tau + h, axpy(s, h, k3));
    s.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    s.q += h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
  }
  return s;
}

EnsembleMoments ensemble_moments(const ClassicalEnsemble& ensemble, const PhaseIntegrals& phase,
                                 double delta) {
  double mean = 0.0;
  double w2 = 0.0;
  for (const auto& s : ensemble.samples()) {
    mean += s.weight * trajectory(s.state, phase, delta).q;
    w2 += s.weight * s.weight;
  }
  double var = 0.0;
  for (const auto& s : ensemble.samples()) {
    const double d = trajectory(s.state, phase, delta).q - mean;
    var += s.weight * d * d;
  }
  return {mean, var, std::sqrt(var * w2)};
}

EnsembleMoments ensemble_moments(const ClassicalEnsemble& ensemble, const DriveProtocol& protocol,
                                 double t, double delta) {
  return ensemble_moments(ensemble, phase_integrals(protocol, t), delta);
}

ClassicalEnsemble moment_matched_ensemble(const LatticeState& state, std::size_t samples,
                                          std::uint64_t seed, double delta) {
  if (samples == 0) throw DomainError("classical ensemble is empty");
  const auto open = LatticeState(state.window(),
                                 std::vector<cplx>(state.amplitudes().begin(), state.amplitudes().end()))
                        .normalized();
  const auto coh = coherence_parameters(open);

  // |psi(kappa)|^2 is a trigonometric polynomial of degree L - 1, so a grid of 2L + 4
  // points integrates it against cos 2 kappa without error.
  const int points = 2 * open.size() + 4;
  const auto bloch = bloch_transform(open, points);
  std::vector<double> weights(points);
  for (int j = 0; j < points; ++j) weights[j] = std::norm(bloch.values[j]);

  const auto& cov = coh.covariance;
  Eigen::Matrix2d a;
  a << cov[kC][kC], cov[kC][kS], cov[kC][kS], cov[kS][kS];
  const Eigen::Vector2d b(cov[kC][kN], cov[kS][kN]);
  const Eigen::Vector2d ab = a.completeOrthogonalDecomposition().solve(b);
  const double sigma2 = cov[kN][kN] - ab.dot(a * ab);
  const double sigma = std::sqrt(std::max(0.0, sigma2));

  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<ClassicalState> pts;
  pts.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double kappa = bloch.kappa[pick(rng)];
    const double c = std::cos(kappa) - coh.mean_C();
    const double s = std::sin(kappa) - coh.mean_S();
    const double xi = normal(rng);
    pts.push_back({kappa / delta, coh.n_mean + ab[0] * c + ab[1] * s + sigma * xi});
  }
  return ClassicalEnsemble::uniform(pts);
}

double classical_invariant(const ClassicalState& s, const PhaseIntegrals& phase, double delta) {
  const double se = std::sin(phase.eta);
  const double ce = std::cos(phase.eta);
  const double pd = s.p * delta;
  return s.q + (phase.u * se - phase.v * ce) * std::cos(pd) +
         (phase.u * ce + phase.v * se) * std::sin(pd);
}

double classical_invariant(const ClassicalState& s, const DriveProtocol& protocol, double t,
                           double delta) {
  return classical_invariant(s, phase_integrals(protocol, t), delta);
}

}  // namespace tbdyn
