#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <boost/math/special_functions/bessel.hpp>

#include "tbdyn/bessel.hpp"
#include "tbdyn/error.hpp"

using namespace tbdyn;

namespace {

// Power series sum_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!) in long double, summed until the
// terms stop changing the total.
long double series_j(int n, long double x) {
  long double term = 1.0L;
  for (int i = 1; i <= n; ++i) term *= x / (2.0L * i);
  long double sum = term;
  for (int k = 1; k < 400; ++k) {
    term *= -(x * x / 4.0L) / (k * static_cast<long double>(k + n));
    const long double next = sum + term;
    if (next == sum) break;
    sum = next;
  }
  return sum;
}

// Brute-force trapezoid for (1/2pi) int exp(i sum b_m sin(m u) - i nu u) du.
double trapezoid_multivar(int nu, const std::vector<double>& b, int nodes) {
  std::complex<double> s{};
  for (int k = 0; k < nodes; ++k) {
    const double u = 2 * std::numbers::pi * k / nodes;
    double phase = -nu * u;
    for (std::size_t m = 0; m < b.size(); ++m) phase += b[m] * std::sin((m + 1) * u);
    s += std::polar(1.0, phase);
  }
  return (s / double(nodes)).real();
}

}  // namespace

TEST_CASE("J_n at zero") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  for (int n : {-3, -1, 1, 2, 17}) CHECK(bessel_j(n, 0.0) == 0.0);
}

TEST_CASE("J_1(1) against the power series") {
  const double ref = static_cast<double>(series_j(1, 1.0L));
  CHECK(std::abs(bessel_j(1, 1.0) - ref) < 1e-15);
  CHECK(std::abs(ref - 0.44005058574493355) < 1e-15);
}

TEST_CASE("J_n agrees with an independent library over the documented range") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> xs(0.0, 500.0);
  std::uniform_int_distribution<int> ns(-200, 200);
  double worst = 0.0;
  for (int i = 0; i < 3000; ++i) {
    const int n = ns(rng);
    const double x = i < 300 ? xs(rng) / 100.0 : xs(rng);
    const double ref = boost::math::cyl_bessel_j(double(n), x);
    worst = std::max(worst, std::abs(bessel_j(n, x) - ref));
  }
  CHECK(worst < 1e-12);
  // Negative arguments follow J_n(-x) = (-1)^n J_n(x).
  CHECK(std::abs(bessel_j(3, -2.5) + bessel_j(3, 2.5)) < 1e-16);
  CHECK(std::abs(bessel_j(4, -2.5) - bessel_j(4, 2.5)) < 1e-16);
}

TEST_CASE("small arguments match the long double series") {
  for (int n = 0; n <= 30; ++n) {
    for (double x : {1e-8, 1e-3, 0.1, 0.7, 1.0}) {
      CHECK(std::abs(bessel_j(n, x) - static_cast<double>(series_j(n, x))) < 1e-16);
    }
  }
}

TEST_CASE("reflection, recurrence and unitarity identities") {
  for (double x : {0.1, 1.0, 5.0, 33.3, 100.0}) {
    for (int n = 1; n < 60; ++n) {
      CHECK(bessel_j(-n, x) == doctest::Approx((n % 2 ? -1.0 : 1.0) * bessel_j(n, x)).epsilon(1e-14));
      const double lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
      CHECK(std::abs(lhs - 2.0 * n / x * bessel_j(n, x)) < 1e-10);
    }
  }
  double s = 0.0;
  for (int m = -40; m <= 40; ++m) s += bessel_j(m, 5.0) * bessel_j(m, 5.0);
  CHECK(std::abs(s - 1.0) < 1e-12);
}

TEST_CASE("generating function closure") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> xs(0.0, 10.0), th(0.0, 2 * std::numbers::pi);
  for (int i = 0; i < 50; ++i) {
    const double x = xs(rng);
    const double theta = th(rng);
    std::complex<double> s{};
    for (int m = -60; m <= 60; ++m) s += bessel_j(m, x) * std::polar(1.0, m * theta);
    CHECK(std::abs(s - std::polar(1.0, x * std::sin(theta))) < 1e-10);
  }
}

TEST_CASE("range evaluation and cutoff") {
  const auto r = bessel_j_range(40, 12.5);
  for (int n = 0; n <= 40; ++n) CHECK(std::abs(r[n] - bessel_j(n, 12.5)) < 1e-15);
  for (double x : {0.0, 0.5, 7.0, 120.0}) {
    const int c = bessel_cutoff(x, 1e-16);
    CHECK(c >= std::abs(x));
    for (int k = c; k < c + 20; ++k) CHECK(std::abs(boost::math::cyl_bessel_j(double(k), x)) < 1e-16);
  }
}

TEST_CASE("out of range argument") {
  CHECK_THROWS_AS(bessel_j(0, 2e6), DomainError);
}

TEST_CASE("multivariable Bessel: trivial and single-variable cases") {
  for (int nu = -3; nu <= 3; ++nu) {
    CHECK(std::abs(bessel_j_multivar(nu, MultiBesselArgs({0.0, 0.0})) - (nu == 0 ? 1.0 : 0.0)) < 1e-14);
  }
  for (double x : {0.3, 1.0, 4.0, 11.0}) {
    for (int nu = -8; nu <= 8; ++nu) {
      CHECK(std::abs(bessel_j_multivar(nu, MultiBesselArgs({x})) - bessel_j(nu, x)) < 1e-10);
    }
  }
}

TEST_CASE("multivariable Bessel against a refined trapezoid") {
  const std::vector<double> b = {1.0, 0.5};
  const double ref = trapezoid_multivar(1, b, 4096);
  CHECK(std::abs(bessel_j_multivar(1, MultiBesselArgs(b)) - ref) < 1e-10);
  // Two-variable function as a product sum of ordinary Bessel functions.
  for (int nu = -5; nu <= 5; ++nu) {
    double s = 0.0;
    for (int k = -40; k <= 40; ++k) s += bessel_j(nu - 2 * k, 1.0) * bessel_j(k, 0.5);
    CHECK(std::abs(bessel_j_multivar(nu, MultiBesselArgs(b)) - s) < 1e-10);
  }
  const auto table = bessel_j_multivar_table(6, MultiBesselArgs({2.0, -0.7, 0.3}));
  for (int nu = -6; nu <= 6; ++nu) {
    CHECK(std::abs(table[nu + 6] - trapezoid_multivar(nu, {2.0, -0.7, 0.3}, 8192)) < 1e-10);
  }
  CHECK_THROWS_AS(bessel_j_multivar(0, MultiBesselArgs({2000.0})), DomainError);
}

TEST_CASE("Bessel zeros") {
  CHECK(std::abs(bessel_zero(0, 1) - 2.404825557695773) < 1e-12);
  CHECK(std::abs(bessel_zero(1, 1) - 3.831705970207512) < 1e-12);
  for (int n : {0, 1, 2, 7, 25, 50}) {
    for (int k : {1, 2, 10, 50}) {
      const double z = bessel_zero(n, k);
      CHECK(std::abs(bessel_j(n, z)) < 1e-12);
      CHECK(std::abs(z - boost::math::cyl_bessel_j_zero(double(n), k)) < 1e-9);
    }
  }
  CHECK_THROWS_AS(bessel_zero(51, 1), DomainError);
  CHECK_THROWS_AS(bessel_zero(0, 0), DomainError);
}
