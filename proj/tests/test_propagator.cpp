#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "tbdyn/bessel.hpp"
#include "tbdyn/error.hpp"
#include "tbdyn/oracle.hpp"
#include "tbdyn/propagator.hpp"

using namespace tbdyn;
using tbdyn::test::cplx;

namespace {

constexpr double kPi = std::numbers::pi;

// Dense H = sum_m (g_m K^m + h.c.) + f N on an open window.
Eigen::MatrixXcd band_hamiltonian(const Window& w, const std::vector<cplx>& g, double f) {
  const int L = w.size();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(L, L);
  const Eigen::MatrixXcd K = test::shift_matrix(w);
  Eigen::MatrixXcd Km = Eigen::MatrixXcd::Identity(L, L);
  for (std::size_t m = 0; m < g.size(); ++m) {
    h += g[m] * Km + std::conj(g[m]) * Km.adjoint();
    Km = Km * K;
  }
  return h + f * test::number_matrix(w);
}

LatticeState dense_evolve(const LatticeState& s, const std::vector<cplx>& g, double f, double t) {
  const auto U = test::unitary(band_hamiltonian(s.window(), g, f), t);
  return test::from_vector(s.window(), U * test::to_vector(s));
}

}  // namespace

TEST_CASE("static field: closed form against dense diagonalization") {
  std::mt19937_64 rng(21);
  const Window w{-60, 60};
  for (auto [f0, g0] : {std::pair{1.0, 1.0}, {0.6, -0.8}, {0.0, 0.5}, {-1.3, 0.4}}) {
    const auto p = DriveProtocol::dc(f0, g0);
    const auto s = test::random_state(rng, w, -6, 6);
    for (double t : {0.4, 2.0, 5.5}) {
      const auto ref = dense_evolve(s, {0.0, g0}, f0, t);
      for (auto method : {EvolveMethod::site, EvolveMethod::bloch}) {
        EvolveOptions o;
        o.method = method;
        CHECK(max_amplitude_deviation(evolve(s, p, t, o).state, ref) < 1e-11);
      }
    }
  }
}

TEST_CASE("Bloch period revival") {
  const auto p = DriveProtocol::dc(1, 1);
  std::mt19937_64 rng(22);
  const auto s = test::random_state(rng, {-50, 50}, -10, 10);
  for (auto method : {EvolveMethod::site, EvolveMethod::bloch}) {
    EvolveOptions o;
    o.method = method;
    CHECK(max_amplitude_deviation(evolve(s, p, 2 * kPi, o).state, s) < 1e-13);
  }
}

TEST_CASE("matrix elements against the dense propagator") {
  const Window w{-40, 40};
  const double f0 = 0.7, g0 = 0.9, t = 3.3;
  const auto U = test::unitary(band_hamiltonian(w, {0.0, g0}, f0), t);
  const auto p = DriveProtocol::dc(f0, g0);
  for (int n = -6; n <= 6; ++n) {
    for (int np = -6; np <= 6; ++np) {
      CHECK(std::abs(element(p, t, n, np) - U(n - w.n_min, np - w.n_min)) < 1e-12);
    }
  }
}

TEST_CASE("rows of the propagator are normalized") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> t(0.0, 20.0);
  const auto p = DriveProtocol::harmonic(2, 1.4, 1, 0.8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ph = phase_integrals(p, t(rng));
    const int C = bessel_cutoff(2 * ph.chi_abs()) + 5;
    double s = 0.0;
    for (int np = -C; np <= C; ++np) s += std::norm(element(ph, 3, 3 + np));
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("field-free spreading populates Bessel squares") {
  const auto s = make_state(SingleSite{0}, {-30, 30});
  const auto r = evolve(s, DriveProtocol::dc(0, 1), 1.0);
  for (int n = -10; n <= 10; ++n) {
    CHECK(std::abs(std::norm(r.state.at(n)) - std::pow(bessel_j(n, 2.0), 2)) < 1e-14);
  }
}

TEST_CASE("time-dependent drives against direct integration") {
  std::mt19937_64 rng(24);
  const std::vector<DriveProtocol> drives = {DriveProtocol::harmonic(1, 1.7, 1, 0.6),
                                             DriveProtocol::fourier(2, {1.2, 0.6}, 1, 0.6),
                                             DriveProtocol::harmonic(0.4, 2.2, 1.9, -0.7)};
  for (const auto& p : drives) {
    const auto s = test::random_state(rng, {-50, 50}, -5, 5);
    for (double t : {1.1, 6.0}) {
      const auto ref = integrate(s, p, t).state;
      CHECK(max_amplitude_deviation(evolve(s, p, t).state, ref) < 1e-8);
      EvolveOptions o;
      o.method = EvolveMethod::bloch;
      CHECK(max_amplitude_deviation(evolve(s, p, t, o).state, ref) < 1e-8);
    }
  }
}

TEST_CASE("twisted ring: closed form against direct integration") {
  std::mt19937_64 rng(25);
  const auto s = test::random_state(rng, {0, 15}, 0, 15, Boundary::ring).with_twist(0.4);
  const auto p = DriveProtocol::harmonic(1, 1.2, 1, 0.7);
  for (double t : {0.9, 4.0}) {
    const auto ref = integrate(s, p, t).state;
    for (auto method : {EvolveMethod::site, EvolveMethod::bloch}) {
      EvolveOptions o;
      o.method = method;
      const auto r = evolve(s, p, t, o).state;
      CHECK(max_amplitude_deviation(r, ref) < 1e-8);
      CHECK(std::abs(std::remainder(r.twist() - ref.twist(), 2 * kPi)) < 1e-9);
    }
  }
}

TEST_CASE("leaks beyond tolerance are errors") {
  const auto s = make_state(SingleSite{0}, {-5, 5});
  CHECK_THROWS_AS(evolve(s, DriveProtocol::dc(0, 1), 5.0), LeakError);
  EvolveOptions loose;
  loose.leak_tolerance = 1.0;
  const auto r = evolve(s, DriveProtocol::dc(0, 1), 5.0, loose);
  CHECK(r.leaked > 1e-3);
  CHECK(std::abs(r.leaked + r.state.norm_squared() - 1.0) < 1e-12);
  EvolveOptions tiny;
  tiny.method = EvolveMethod::bloch;
  tiny.bloch_points = 5;
  CHECK_THROWS_AS(evolve(s, DriveProtocol::dc(0, 1), 1.0, tiny), DomainError);
}

TEST_CASE("single band reduces to tight binding for nearest neighbours") {
  std::mt19937_64 rng(26);
  const auto s = test::random_state(rng, {-40, 40}, -4, 4);
  const auto p = DriveProtocol::harmonic(1, 0.9, 1, 0.0);
  const auto field_and_hop = DriveProtocol::harmonic(1, 0.9, 1, 0.45);
  const auto a = evolve_single_band(s, SingleBandDispersion::tight_binding(0.45), p, 3.7).state;
  const auto b = evolve(s, field_and_hop, 3.7).state;
  CHECK(max_amplitude_deviation(a, b) < 1e-12);
}

TEST_CASE("third-neighbour band: ladder convention matches dense evolution") {
  std::mt19937_64 rng(27);
  const std::vector<cplx> g = {0.0, 0.5, 0.2, cplx(0.15, 0.05)};
  const SingleBandDispersion band(g);
  const auto s = test::random_state(rng, {-60, 60}, -4, 4);
  for (double f0 : {0.0, 0.7}) {
    const auto field = DriveProtocol::dc(f0, 0.0);
    for (double t : {1.0, 4.0}) {
      const auto ref = dense_evolve(s, g, f0, t);
      CHECK(max_amplitude_deviation(evolve_single_band(s, band, field, t).state, ref) < 1e-10);
      EvolveOptions o;
      o.method = EvolveMethod::bloch;
      CHECK(max_amplitude_deviation(evolve_single_band(s, band, field, t, o).state, ref) < 1e-10);
      if (f0 != 0.0) {
        const auto wrong = evolve_single_band(s, band, field, t, {}, CommutatorConvention::power_of_two);
        CHECK(max_amplitude_deviation(wrong.state, ref) > 1e-2);
      }
    }
  }
}

TEST_CASE("commutator factors") {
  CHECK(commutator_factor(0, CommutatorConvention::ladder) == 0.0);
  CHECK(commutator_factor(3, CommutatorConvention::ladder) == 3.0);
  CHECK(commutator_factor(1, CommutatorConvention::power_of_two) == 1.0);
  CHECK(commutator_factor(2, CommutatorConvention::power_of_two) == 2.0);
  CHECK(commutator_factor(3, CommutatorConvention::power_of_two) == 4.0);
  CHECK(std::abs(SingleBandDispersion({0.1, 0.5}).energy(0.3) - (0.2 + std::cos(0.3))) < 1e-15);
}
