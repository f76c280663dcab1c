#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "tbdyn/bessel.hpp"
#include "tbdyn/error.hpp"
#include "tbdyn/floquet.hpp"
#include "tbdyn/oracle.hpp"

using namespace tbdyn;
using tbdyn::test::cplx;

namespace {

constexpr double kPi = std::numbers::pi;
const Window kRing{-16, 15};

// Largest |a_n - b_n| including the twist of the ring closure.
double ring_distance(const LatticeState& a, const LatticeState& b) {
  double d = max_amplitude_deviation(a, b);
  return std::max(d, std::abs(std::polar(1.0, a.twist()) - std::polar(1.0, b.twist())));
}

// (H psi)_n = g (psi_{n+1} + psi_{n-1}) + f n psi_n on a twisted ring.
std::vector<cplx> apply_h(const LatticeState& s, double f, double g) {
  std::vector<cplx> out;
  for (int n = s.window().n_min; n <= s.window().n_max; ++n) {
    out.push_back(g * (s.at(n + 1) + s.at(n - 1)) + f * double(n) * s.at(n));
  }
  return out;
}

}  // namespace

TEST_CASE("quasienergy band values") {
  const auto flat = DriveProtocol::harmonic(1, 0, 1, 0.7);
  for (double k : {-3.0, 0.0, 1.0}) CHECK(std::abs(quasienergy(flat, k)) < 1e-13);
  const auto h = DriveProtocol::harmonic(1, 1, 1, 0.25);
  CHECK(std::abs(quasienergy(h, 0.0) - 0.5 * bessel_j(1, 1.0)) < 1e-12);
  CHECK(std::abs(quasienergy(h, 0.0) - 0.2200252928724) < 1e-12);
  CHECK_THROWS_AS(quasienergy(DriveProtocol::dc(1, 1), 0.0), DomainError);
  CHECK_THROWS_AS(quasienergy(DriveProtocol::harmonic(1.5, 1, 1, 1), 0.0), DomainError);
}

TEST_CASE("bandwidth equals twice the drift rate") {
  for (const auto& p : {DriveProtocol::harmonic(1, 1, 1, 0.25), DriveProtocol::harmonic(3, 2.2, 1, -0.6),
                        DriveProtocol::fourier(2, {1.2, 0.6}, 1, 0.6)}) {
    const auto band = quasienergy_band(p);
    double lo = 1e9, hi = -1e9;
    for (int j = 0; j < 4096; ++j) {
      const double e = band.energy(-kPi + 2 * kPi * j / 4096);
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    CHECK(std::abs((hi - lo) - band.bandwidth()) < 1e-6);
    CHECK(std::abs(band.bandwidth() - 2 * std::abs(drift_rate(p).gamma)) < 1e-10);
  }
}

TEST_CASE("symmetric drives have a real amplitude") {
  const auto band = quasienergy_band(DriveProtocol::harmonic(2, 1.7, 1, 0.5));
  CHECK(std::abs(band.amplitude.imag()) < 1e-13);
  CHECK(std::abs(std::sin(band.phase())) < 1e-12);
}

TEST_CASE("Houston state at t = 0 is the Bloch state") {
  const auto p = DriveProtocol::harmonic(1, 1, 1, 0.5);
  const double kappa = 0.6;
  const auto s = houston_state(kappa, p, 0.0, kRing);
  for (int n = kRing.n_min; n <= kRing.n_max; ++n) {
    CHECK(std::abs(s.at(n) - std::polar(1 / std::sqrt(2 * kPi), n * kappa)) < 1e-15);
  }
}

TEST_CASE("Houston states are eigenstates of K on the ring") {
  const auto p = DriveProtocol::harmonic(1, 1.4, 1, 0.5);
  for (double t : {0.0, 0.77, 5.2}) {
    const double kappa = -1.1;
    const auto s = houston_state(kappa, p, t, kRing);
    const auto shifted = apply_shift(s, 1).state;
    const cplx ev = std::polar(1.0, kappa - eta(p, t));
    double worst = 0.0;
    for (int n = kRing.n_min; n <= kRing.n_max; ++n) worst = std::max(worst, std::abs(shifted.at(n) - ev * s.at(n)));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("Houston states follow the closed-form and direct evolution") {
  const auto p = DriveProtocol::harmonic(2, 1.1, 1, 0.6);
  const auto s0 = houston_state(0.9, p, 0.0, kRing, Boundary::ring, HoustonNorm::unit);
  for (double t : {1.3, 4.0}) {
    const auto target = houston_state(0.9, p, t, kRing, Boundary::ring, HoustonNorm::unit);
    CHECK(ring_distance(evolve(s0, p, t).state, target) < 1e-10);
    CHECK(ring_distance(integrate(s0, p, t).state, target) < 1e-8);
  }
}

TEST_CASE("Houston states pick up the quasienergy phase each period") {
  const auto p = DriveProtocol::harmonic(1, 1, 1, 0.25);
  const double T = 2 * kPi;
  const double kappa = 0.4;
  const double eps = quasienergy(p, kappa);
  for (double t : {0.0, 1.9}) {
    const auto a = houston_state(kappa, p, t + T, kRing);
    const auto b = houston_state(kappa, p, t, kRing);
    double worst = 0.0;
    for (int n = kRing.n_min; n <= kRing.n_max; ++n) {
      worst = std::max(worst, std::abs(a.at(n) - std::polar(1.0, -eps * T) * b.at(n)));
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("Floquet states are periodic") {
  const auto p = DriveProtocol::harmonic(1, 1, 1, 0.25);
  const double T = 2 * kPi;
  const double kappa = -2.2;
  CHECK(ring_distance(floquet_state(kappa, p, T, kRing), houston_state(kappa, p, 0.0, kRing)) < 1e-10);
  for (double t : {0.3, 2.5}) {
    for (int k = 1; k <= 3; ++k) {
      CHECK(ring_distance(floquet_state(kappa, p, t + k * T, kRing), floquet_state(kappa, p, t, kRing)) < 1e-8);
    }
  }
  const auto flat = DriveProtocol::harmonic(1, 0, 1, 0.25);
  CHECK(ring_distance(floquet_state(kappa, flat, 1.7, kRing), houston_state(kappa, flat, 1.7, kRing)) < 1e-12);
  CHECK_THROWS_AS(floquet_state(kappa, DriveProtocol::dc(1, 1), 1.0, kRing), DomainError);
}

TEST_CASE("Houston states solve the Schroedinger equation") {
  const auto p = DriveProtocol::harmonic(1, 1.3, 1, 0.5);
  const double h = 1e-4;
  for (double t : {0.5, 3.1}) {
    const auto s = houston_state(0.3, p, t, kRing, Boundary::ring, HoustonNorm::unit);
    auto at = [&](double dt) {
      return houston_state(0.3, p, t + dt, kRing, Boundary::ring, HoustonNorm::unit);
    };
    const auto p1 = at(h), m1 = at(-h), p2 = at(2 * h), m2 = at(-2 * h);
    const auto hs = apply_h(s, p.f(t), p.g(t));
    double r = 0.0;
    for (int i = 0; i < kRing.size(); ++i) {
      // Five-point central difference.
      const cplx dt = (8.0 * (p1.amplitudes()[i] - m1.amplitudes()[i]) -
                       (p2.amplitudes()[i] - m2.amplitudes()[i])) / (12 * h);
      r += std::norm(cplx(0, 1) * dt - hs[i]);
    }
    CHECK(std::sqrt(r) < 1e-5);
  }
}

TEST_CASE("invariant coefficients") {
  CHECK(invariant_lambda(DriveProtocol::dc(1, 1), 0.0).lambda == cplx(0.0));
  // eta = pi, chi = -2i, so lambda = -i e^{i pi} (-2i) = 2.
  const auto c = invariant_lambda(DriveProtocol::dc(1, 1), kPi);
  CHECK(std::abs(c.lambda - cplx(2.0)) < 1e-13);
  CHECK(c.gamma == 1.0);
  // lambda' = i (f lambda - g) by central differences.
  const auto p = DriveProtocol::harmonic(1.5, 0.9, 1.5, 0.7);
  const double h = 1e-4;
  for (double t : {0.4, 2.2, 6.0}) {
    const cplx d = (invariant_lambda(p, t + h).lambda - invariant_lambda(p, t - h).lambda) / (2 * h);
    const cplx rhs = cplx(0, 1) * (p.f(t) * invariant_lambda(p, t).lambda - p.g(t));
    CHECK(std::abs(d - rhs) < 1e-6);
  }
}

TEST_CASE("invariant is conserved on directly integrated states") {
  const auto s = make_state(Gaussian{2.0, 3.0, 0.8}, {-60, 60});
  const double n0 = position_moments(s).first;
  const auto dc = DriveProtocol::dc(1, 1);
  CHECK(invariant_expectation(s, dc, 0.0).k_form == doctest::Approx(n0).epsilon(1e-14));
  for (double t : {0.3, 1.7, 2 * kPi}) {
    const auto v = invariant_on_state(integrate(s, dc, t).state, phase_integrals(dc, t));
    CHECK(std::abs(v.k_form - n0) < 1e-8);
    CHECK(std::abs(v.cs_form - n0) < 1e-8);
  }
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> ts(0.0, 12.0);
  const auto h = DriveProtocol::harmonic(1, 1.5, 1, 0.8);
  for (int i = 0; i < 10; ++i) {
    const double t = ts(rng);
    const auto v = invariant_on_state(integrate(s, h, t).state, phase_integrals(h, t));
    CHECK(std::abs(v.k_form - n0) < 1e-7);
    const auto w = invariant_expectation(s, h, t);
    CHECK(std::abs(w.k_form - n0) < 1e-10);
    CHECK(std::abs(w.cs_form - w.k_form) < 1e-12);
  }
}
