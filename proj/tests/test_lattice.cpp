#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "tbdyn/error.hpp"
#include "tbdyn/lattice.hpp"

using namespace tbdyn;
using tbdyn::test::cplx;

TEST_CASE("single site state is a delta") {
  const auto s = make_state(SingleSite{0}, {-8, 8});
  for (int n = -8; n <= 8; ++n) CHECK(s.at(n) == cplx(n == 0 ? 1.0 : 0.0));
  CHECK(s.norm_squared() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gaussian without momentum is symmetric and centred") {
  const auto s = make_state(Gaussian{0.0, 2.0, 0.0}, {-32, 32});
  for (int n = 1; n <= 32; ++n) {
    CHECK(std::abs(s.at(n) - s.at(-n)) < 1e-15);
    CHECK(std::abs(s.at(n).imag()) < 1e-15);
  }
  CHECK(std::abs(position_moments(s).first) < 1e-14);
  CHECK(std::abs(s.norm_squared() - 1.0) < 1e-12);
}

TEST_CASE("gaussian with momentum pi/2 has K close to i exp(-1/(8 sigma^2))") {
  const double sigma = 2.0;
  const auto s = make_state(Gaussian{0.0, sigma, std::numbers::pi / 2}, {-40, 40});
  // Direct sum of c*_{n-1} c_n on the generated amplitudes.
  cplx k{};
  for (int n = -39; n <= 40; ++n) k += std::conj(s.at(n - 1)) * s.at(n);
  const auto coh = coherence_parameters(s);
  CHECK(std::abs(coh.K - k) < 1e-14);
  // The discrete sum differs from the continuum value only by exponentially small terms.
  CHECK(std::abs(coh.K - cplx(0, std::exp(-1.0 / (8 * sigma * sigma)))) < 1e-8);
}

TEST_CASE("state preparation errors") {
  CHECK_THROWS_AS(make_state(Gaussian{0.0, 0.0, 0.0}, {-8, 8}), DomainError);
  CHECK_THROWS_AS(make_state(Gaussian{0.0, 5.0, 0.0}, {-8, 8}), DomainError);
  CHECK_THROWS_AS(make_state(ExplicitAmplitudes{0, {0.0, 0.0}}, {-8, 8}), DomainError);
  CHECK_THROWS_AS(make_state(SingleSite{9}, {-8, 8}), DomainError);
}

TEST_CASE("apply_shift moves amplitude down one site") {
  const auto s = make_state(SingleSite{0}, {-8, 8});
  const auto r = apply_shift(s, 1);
  CHECK(r.state.at(-1) == cplx(1.0));
  CHECK(r.state.at(0) == cplx(0.0));
  CHECK(r.leaked == 0.0);

  std::mt19937_64 rng(1);
  const auto g = test::random_state(rng, {-10, 10}, -5, 5);
  CHECK(max_amplitude_deviation(apply_shift(g, 0).state, g) == 0.0);
  CHECK(max_amplitude_deviation(apply_shift(apply_shift(g, 1).state, -1).state, g) == 0.0);
}

TEST_CASE("apply_shift reports mass pushed off an open window") {
  const auto s = make_state(ExplicitAmplitudes{-8, {0.6, 0.8}}, {-8, 8});
  const auto r = apply_shift(s, 1);
  CHECK(r.leaked == doctest::Approx(0.36).epsilon(1e-14));
  CHECK_THROWS_AS(apply_shift(s, 18), DomainError);
}

TEST_CASE("shift on a ring picks up the twist") {
  const double twist = 0.7;
  std::mt19937_64 rng(2);
  const auto s = test::random_state(rng, {0, 9}, 0, 9, Boundary::ring).with_twist(twist);
  const auto r = apply_shift(s, 1);
  CHECK(std::abs(r.state.at(9) - std::polar(1.0, twist) * s.at(0)) < 1e-15);
  CHECK(r.leaked == 0.0);
  CHECK(std::abs(r.state.norm_squared() - 1.0) < 1e-13);
}

TEST_CASE("Bloch transform of a delta is flat") {
  const auto b = bloch_transform(make_state(SingleSite{0}, {-8, 8}), 32);
  for (auto v : b.values) CHECK(std::abs(v - cplx(1.0 / std::sqrt(2 * std::numbers::pi))) < 1e-15);
  CHECK(b.kappa.front() == doctest::Approx(-std::numbers::pi));
}

TEST_CASE("plane wave peaks at its momentum") {
  const int L = 32;
  const int j0 = 21;
  const double kappa0 = -std::numbers::pi + 2 * std::numbers::pi * j0 / L;
  std::vector<cplx> v(L);
  for (int n = 0; n < L; ++n) v[n] = std::polar(1.0, kappa0 * n);
  const auto s = LatticeState({0, L - 1}, v, Boundary::ring).normalized();
  const auto b = bloch_transform(s, L);
  int arg = 0;
  for (int j = 0; j < L; ++j) {
    if (std::abs(b.values[j]) > std::abs(b.values[arg])) arg = j;
  }
  CHECK(arg == j0);
}

TEST_CASE("Bloch round trip and Parseval") {
  const auto s = make_state(Gaussian{0.0, 2.0, 0.3}, {-24, 24});
  for (int M : {49, 64, 101}) {
    const auto b = bloch_transform(s, M);
    double parseval = 0.0;
    for (auto v : b.values) parseval += std::norm(v);
    CHECK(std::abs(parseval * 2 * std::numbers::pi / M - 1.0) < 1e-10);
    CHECK(max_amplitude_deviation(inverse_bloch(b, s.window()), s) < 1e-12);
  }
  CHECK_THROWS_AS(bloch_transform(s, 48), DomainError);
}

TEST_CASE("coherence parameters of simple states") {
  const auto delta = coherence_parameters(make_state(SingleSite{0}, {-8, 8}));
  CHECK(delta.K == cplx(0.0));
  CHECK(delta.J == cplx(0.0));
  CHECK(delta.L == cplx(0.0));
  CHECK(delta.n_mean == 0.0);

  const double r = 1.0 / std::sqrt(2.0);
  const auto pair = coherence_parameters(make_state(ExplicitAmplitudes{0, {r, r}}, {-8, 8}));
  CHECK(std::abs(pair.K - cplx(0.5)) < 1e-15);
  CHECK(std::abs(pair.J - cplx(0.5)) < 1e-15);
  CHECK(std::abs(pair.L) < 1e-15);

  // A broad packet with random phases has little coherence.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ph(0, 2 * std::numbers::pi);
  std::vector<cplx> v(2001);
  for (auto& c : v) c = std::polar(1.0, ph(rng));
  const auto broad = coherence_parameters(LatticeState({-1000, 1000}, v).normalized());
  CHECK(std::abs(broad.K) < 0.1);
  CHECK(broad.covariance[kC][kC] == doctest::Approx(0.5).epsilon(0.1));
  CHECK(broad.covariance[kS][kS] == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("coherence parameters agree with dense operator expectations") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Window w{-31, 32};
    const auto s = test::random_state(rng, w, -29, 30);
    const auto v = test::to_vector(s);
    const auto K = test::shift_matrix(w);
    const auto N = test::number_matrix(w);
    const Eigen::MatrixXcd C = 0.5 * (K + K.adjoint());
    const Eigen::MatrixXcd S = (K - K.adjoint()) / cplx(0, 2);
    auto ev = [&](const Eigen::MatrixXcd& a) { return v.dot(a * v); };
    auto sym = [&](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
      return 0.5 * ev(a * b + b * a).real() - ev(a).real() * ev(b).real();
    };
    const auto coh = coherence_parameters(s);
    CHECK(std::abs(coh.K - ev(K)) < 1e-12);
    CHECK(std::abs(coh.J - ev(N * K + K * N)) < 1e-12);
    CHECK(std::abs(coh.L - ev(K * K)) < 1e-12);
    CHECK(std::abs(coh.n_mean - ev(N).real()) < 1e-12);
    CHECK(std::abs(coh.n2_mean - ev(N * N).real()) < 1e-10);
    const Eigen::MatrixXcd ops[3] = {C, S, N};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) CHECK(std::abs(coh.covariance[a][b] - sym(ops[a], ops[b])) < 1e-11);
    }
    CHECK(std::abs(coh.K) <= 1.0);
    CHECK(std::abs(coh.L) <= 1.0);
    // <C^2> + <S^2> = 1 holds for states away from the window edge.
    const double c2 = coh.covariance[kC][kC] + coh.K.real() * coh.K.real();
    const double s2 = coh.covariance[kS][kS] + coh.K.imag() * coh.K.imag();
    CHECK(std::abs(c2 + s2 - 1.0) < 1e-12);
  }
}

TEST_CASE("|K| and |L| never exceed one") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> len(1, 40);
    const int L = len(rng);
    const auto s = test::random_state(rng, {0, L + 4}, 2, 2 + L - 1);
    const auto coh = coherence_parameters(s);
    CHECK(std::abs(coh.K) <= 1.0 + 1e-15);
    CHECK(std::abs(coh.L) <= 1.0 + 1e-15);
  }
}
