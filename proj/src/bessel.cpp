#include "tbdyn/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <fmt/format.h>

#include "tbdyn/error.hpp"

namespace tbdyn {

namespace {

constexpr double kRescaleAbove = 1e200;
constexpr double kRescaleFactor = 1e-200;
constexpr double kSeriesLimit = 1.0;

void check_argument(double x) {
  if (!std::isfinite(x) || std::abs(x) >= kBesselArgumentLimit) {
    throw DomainError(fmt::format("Bessel argument {} outside |x| < {:g}", x,
                                  kBesselArgumentLimit));
  }
}

// Ascending series, used where |x| <= 1 so that no cancellation occurs.
double series(int n, double x) {
  const long double half = 0.5L * x;
  const long double q = -half * half;
  long double term = std::exp(n * std::log(std::abs(half)) - std::lgamma(n + 1.0L));
  if (x < 0 && (n % 2 != 0)) term = -term;
  long double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * (k + n));
    sum += term;
    if (std::abs(term) < 1e-22L * std::abs(sum)) break;
  }
  return static_cast<double>(sum);
}

int recurrence_start(int n_max, double x) {
  const double top = std::max<double>(n_max, x);
  int start = static_cast<int>(std::ceil(top + 40.0 + 12.0 * std::cbrt(top)));
  if (start % 2 != 0) ++start;
  return start;
}

// Miller's algorithm for x > 0.
std::vector<double> miller(int n_max, double x) {
  const int start = recurrence_start(n_max, x);
  std::vector<double> out(n_max + 1, 0.0);
  double upper = 0.0;      // j_{k+1}
  double current = 1e-280;  // j_k
  double norm = 0.0;
  const double two_over_x = 2.0 / x;
  for (int k = start; k >= 0; --k) {
    if (k <= n_max) out[k] = current;
    if (k == 0) {
      norm += current;
    } else if (k % 2 == 0) {
      norm += 2.0 * current;
    }
    if (k == 0) break;
    const double lower = k * two_over_x * current - upper;
    upper = current;
    current = lower;
    if (std::abs(current) > kRescaleAbove) {
      current *= kRescaleFactor;
      upper *= kRescaleFactor;
      norm *= kRescaleFactor;
      for (int i = k; i <= n_max; ++i) out[i] *= kRescaleFactor;
    }
  }
  for (auto& v : out) v /= norm;
  return out;
}

}  // namespace

std::vector<double> bessel_j_range(int n_max, double x) {
  check_argument(x);
  if (n_max < 0) throw DomainError(fmt::format("negative maximum order {}", n_max));
  std::vector<double> out(n_max + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (std::abs(x) <= kSeriesLimit) {
    for (int n = 0; n <= n_max; ++n) out[n] = series(n, x);
    return out;
  }
  out = miller(n_max, std::abs(x));
  if (x < 0) {
    for (int n = 1; n <= n_max; n += 2) out[n] = -out[n];
  }
  return out;
}

double bessel_j(int n, double x) {
  check_argument(x);
  double sign = 1.0;
  if (n < 0) {
    n = -n;
    if (n % 2 != 0) sign = -sign;
  }
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (std::abs(x) <= kSeriesLimit) return sign * series(n, x);
  if (x < 0) {
    x = -x;
    if (n % 2 != 0) sign = -sign;
  }
  return sign * miller(n, x)[n];
}

int bessel_cutoff(double x, double tol) {
  const double ax = std::abs(x);
  if (ax == 0.0) return 1;
  int top = static_cast<int>(std::ceil(ax + 40.0 + 12.0 * std::cbrt(ax)));
  for (;;) {
    const auto j = bessel_j_range(top, ax);
    for (int m = static_cast<int>(std::ceil(ax)); m <= top; ++m) {
      if (std::abs(j[m]) < tol) return m;
    }
    top *= 2;
  }
}

MultiBesselArgs::MultiBesselArgs(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.empty()) throw DomainError("many-variable Bessel function needs at least one argument");
  for (double b : betas_) {
    if (!std::isfinite(b)) throw DomainError("non-finite Bessel argument");
  }
}

double MultiBesselArgs::bandwidth() const noexcept {
  double s = 0.0;
  for (std::size_t m = 0; m < betas_.size(); ++m) s += static_cast<double>(m + 1) * std::abs(betas_[m]);
  return s;
}

double MultiBesselArgs::l1_norm() const noexcept {
  double s = 0.0;
  for (double b : betas_) s += std::abs(b);
  return s;
}

MultiBesselArgs MultiBesselArgs::negated() const {
  auto b = betas_;
  for (auto& v : b) v = -v;
  return MultiBesselArgs(std::move(b));
}

namespace {

constexpr int kMaxNodes = 1 << 22;
constexpr double kMultivarTolerance = 1e-11;

std::vector<double> multivar_at(int nu_max, const MultiBesselArgs& args, int nodes) {
  const auto& betas = args.betas();
  std::vector<double> out(2 * nu_max + 1, 0.0);
  std::vector<std::complex<double>> acc(out.size());
  const double h = 2.0 * std::numbers::pi / nodes;
  for (int k = 0; k < nodes; ++k) {
    const double u = h * k;
    double phase = 0.0;
    for (std::size_t m = 0; m < betas.size(); ++m) phase += betas[m] * std::sin((m + 1) * u);
    // acc[nu + nu_max] += F(u) e^{-i nu u}, starting from nu = -nu_max.
    std::complex<double> term = std::polar(1.0, phase + nu_max * u);
    const std::complex<double> step = std::polar(1.0, -u);
    for (auto& a : acc) {
      a += term;
      term *= step;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = acc[i].real() / nodes;
  return out;
}

int initial_nodes(int nu_max, const MultiBesselArgs& args) {
  const double need = 2.0 * (nu_max + args.bandwidth() + 16.0);
  int n = 64;
  while (n < need) n *= 2;
  return n;
}

}  // namespace

std::vector<double> bessel_j_multivar_table(int nu_max, const MultiBesselArgs& args) {
  if (nu_max < 0) throw DomainError("negative order range");
  if (args.l1_norm() >= 1e3) {
    throw DomainError(fmt::format("sum of |beta_m| = {} outside the supported range < 1e3",
                                  args.l1_norm()));
  }
  int nodes = initial_nodes(nu_max, args);
  auto prev = multivar_at(nu_max, args, nodes);
  while (nodes < kMaxNodes) {
    nodes *= 2;
    auto next = multivar_at(nu_max, args, nodes);
    double diff = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) diff = std::max(diff, std::abs(next[i] - prev[i]));
    if (diff < kMultivarTolerance) return next;
    prev = std::move(next);
  }
  throw ConvergenceError(
      fmt::format("many-variable Bessel quadrature did not converge with {} nodes", kMaxNodes));
}

double bessel_j_multivar(int nu, const MultiBesselArgs& args) {
  const int a = std::abs(nu);
  return bessel_j_multivar_table(a, args)[nu + a];
}

double bessel_zero(int n, int k) {
  if (n < 0 || n > 50 || k < 1 || k > 50) {
    throw DomainError(fmt::format("bessel_zero({}, {}) outside n in [0, 50], k in [1, 50]", n, k));
  }
  // Every positive zero of J_n exceeds n, consecutive zeros are more than 2.4 apart.
  const double step = 0.25;
  const double limit = n + 4.0 * (k + 2) * std::numbers::pi + 50.0;
  double a = n == 0 ? 0.5 : static_cast<double>(n);
  double fa = bessel_j(n, a);
  int found = 0;
  while (a < limit) {
    const double b = a + step;
    const double fb = bessel_j(n, b);
    if (fa == 0.0) {
      if (++found == k) return a;
    } else if ((fa < 0) != (fb < 0) && fb != 0.0) {
      if (++found == k) {
        double lo = a, hi = b, flo = fa;
        for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = bessel_j(n, mid);
          if (fm == 0.0) return mid;
          if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        return 0.5 * (lo + hi);
      }
    }
    a = b;
    fa = fb;
  }
  throw ConvergenceError(fmt::format("could not bracket zero {} of J_{}", k, n));
}

}  // namespace tbdyn
