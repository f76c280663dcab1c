#include "tbdyn/drive.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "tbdyn/bessel.hpp"
#include "tbdyn/error.hpp"
#include "tbdyn/quadrature.hpp"

namespace tbdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kQuadratureTolerance = 1e-11;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw DomainError(fmt::format("{} must be finite", name));
}

// Position of t inside a table: segment index and local offset.
struct Segment {
  std::size_t k;
  double dt;
};

Segment locate(const std::vector<double>& times, double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
  k = std::min(k, times.size() - 2);
  return {k, t - times[k]};
}

double lerp(const std::vector<double>& y, const std::vector<double>& times, Segment s) {
  const double h = times[s.k + 1] - times[s.k];
  return y[s.k] + (y[s.k + 1] - y[s.k]) * (s.dt / h);
}

// eta inside segment k relative to its start: quadratic in the offset.
double segment_eta(const TabulatedDrive& d, std::size_t k, double dt) {
  const double h = d.times[k + 1] - d.times[k];
  return d.f[k] * dt + 0.5 * (d.f[k + 1] - d.f[k]) / h * dt * dt;
}

cplx segment_chi(const TabulatedDrive& d, std::size_t k, double eta_start, double dt, double tol) {
  const double h = d.times[k + 1] - d.times[k];
  auto integrand = [&](double s) {
    const double g = d.g[k] + (d.g[k + 1] - d.g[k]) * (s / h);
    return g * std::polar(1.0, -(eta_start + segment_eta(d, k, s)));
  };
  return detail::integrate_adaptive(integrand, 0.0, dt, tol, 0.25);
}

// Reduces t to (q, r) with t = q T + r and r in [0, T).
std::pair<long, double> wrap(double t, double period) {
  const double q = std::floor(t / period);
  double r = t - q * period;
  if (r >= period) r -= period;
  if (r < 0) r = 0;
  return {static_cast<long>(q), r};
}

}  // namespace

struct DriveProtocol::TableCache {
  std::vector<double> eta;  // at the nodes
  std::vector<cplx> chi;    // at the nodes
};

namespace {

void validate(const DriveProtocol::Variant& v) {
  std::visit(overloaded{
                 [](const DcDrive& d) {
                   require_finite(d.f0, "f0");
                   require_finite(d.g0, "g0");
                 },
                 [](const HarmonicDrive& d) {
                   require_finite(d.f0, "f0");
                   require_finite(d.f1, "f1");
                   require_finite(d.g0, "g0");
                   if (!(d.omega > 0.0) || !std::isfinite(d.omega)) {
                     throw DomainError(fmt::format("drive frequency must be positive, got {}", d.omega));
                   }
                 },
                 [](const FourierDrive& d) {
                   require_finite(d.f0, "f0");
                   require_finite(d.g0, "g0");
                   for (double m : d.modes) require_finite(m, "Fourier mode");
                   if (!(d.omega > 0.0) || !std::isfinite(d.omega)) {
                     throw DomainError(fmt::format("drive frequency must be positive, got {}", d.omega));
                   }
                 },
                 [](const TabulatedDrive& d) {
                   if (d.times.size() < 2) throw DomainError("a tabulated drive needs at least 2 samples");
                   if (d.f.size() != d.times.size() || d.g.size() != d.times.size()) {
                     throw DomainError("tabulated drive columns differ in length");
                   }
                   if (d.times.front() != 0.0) throw DomainError("tabulated drive must start at t = 0");
                   for (std::size_t i = 1; i < d.times.size(); ++i) {
                     if (!(d.times[i] > d.times[i - 1])) {
                       throw DomainError(fmt::format("time grid not strictly increasing at sample {}", i));
                     }
                   }
                   for (std::size_t i = 0; i < d.times.size(); ++i) {
                     require_finite(d.f[i], "tabulated f");
                     require_finite(d.g[i], "tabulated g");
                   }
                 },
             },
             v);
}

}  // namespace

DriveProtocol::DriveProtocol(Variant v) : v_(std::move(v)) {
  validate(v_);
  if (const auto* d = std::get_if<TabulatedDrive>(&v_)) {
    auto cache = std::make_shared<TableCache>();
    const std::size_t n = d->times.size();
    cache->eta.resize(n);
    cache->chi.resize(n);
    cache->eta[0] = 0.0;
    cache->chi[0] = 0.0;
    const double tol = kQuadratureTolerance / static_cast<double>(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double h = d->times[k + 1] - d->times[k];
      cache->chi[k + 1] = cache->chi[k] + segment_chi(*d, k, cache->eta[k], h, tol);
      cache->eta[k + 1] = cache->eta[k] + segment_eta(*d, k, h);
    }
    cache_ = std::move(cache);
  }
}

DriveProtocol DriveProtocol::dc(double f0, double g0) { return DriveProtocol(DcDrive{f0, g0}); }

DriveProtocol DriveProtocol::harmonic(double f0, double f1, double omega, double g0) {
  return DriveProtocol(HarmonicDrive{f0, f1, omega, g0});
}

DriveProtocol DriveProtocol::fourier(double f0, std::vector<double> modes, double omega, double g0) {
  return DriveProtocol(FourierDrive{f0, std::move(modes), omega, g0});
}

DriveProtocol DriveProtocol::tabulated(std::vector<double> times, std::vector<double> f,
                                       std::vector<double> g, bool periodic) {
  return DriveProtocol(TabulatedDrive{std::move(times), std::move(f), std::move(g), periodic});
}

namespace {

double table_value(const TabulatedDrive& d, const std::vector<double>& column, double t) {
  const double horizon = d.times.back();
  if (d.periodic) {
    t = wrap(t, horizon).second;
  } else if (t < 0.0 || t > horizon) {
    throw DomainError(fmt::format("t = {} outside the tabulated horizon [0, {}]", t, horizon));
  }
  return lerp(column, d.times, locate(d.times, t));
}

}  // namespace

double DriveProtocol::f(double t) const {
  return std::visit(overloaded{
                        [](const DcDrive& d) { return d.f0; },
                        [t](const HarmonicDrive& d) { return d.f0 - d.f1 * std::cos(d.omega * t); },
                        [t](const FourierDrive& d) {
                          double s = d.f0;
                          for (std::size_t m = 0; m < d.modes.size(); ++m) {
                            s += d.modes[m] * std::cos((m + 1) * d.omega * t);
                          }
                          return s;
                        },
                        [t](const TabulatedDrive& d) { return table_value(d, d.f, t); },
                    },
                    v_);
}

double DriveProtocol::g(double t) const {
  return std::visit(overloaded{
                        [](const DcDrive& d) { return d.g0; },
                        [](const HarmonicDrive& d) { return d.g0; },
                        [](const FourierDrive& d) { return d.g0; },
                        [t](const TabulatedDrive& d) { return table_value(d, d.g, t); },
                    },
                    v_);
}

std::optional<double> DriveProtocol::period() const {
  return std::visit(overloaded{
                        [](const DcDrive&) -> std::optional<double> { return std::nullopt; },
                        [](const HarmonicDrive& d) -> std::optional<double> { return kTwoPi / d.omega; },
                        [](const FourierDrive& d) -> std::optional<double> { return kTwoPi / d.omega; },
                        [](const TabulatedDrive& d) -> std::optional<double> {
                          if (!d.periodic) return std::nullopt;
                          return d.times.back();
                        },
                    },
                    v_);
}

double DriveProtocol::mean_field() const {
  if (const auto* d = std::get_if<TabulatedDrive>(&v_)) return cache_->eta.back() / d->times.back();
  return std::visit(overloaded{
                        [](const DcDrive& d) { return d.f0; },
                        [](const HarmonicDrive& d) { return d.f0; },
                        [](const FourierDrive& d) { return d.f0; },
                        [](const TabulatedDrive&) { return 0.0; },
                    },
                    v_);
}

std::optional<Resonance> DriveProtocol::resonance() const {
  const auto T = period();
  if (!T) return std::nullopt;
  const double omega = kTwoPi / *T;
  const double ratio = mean_field() / omega;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > kResonanceTolerance * std::max(1.0, std::abs(ratio))) {
    return std::nullopt;
  }
  return Resonance{static_cast<int>(n), omega, *T, mean_field()};
}

DriveProtocol DriveProtocol::field_phase_protocol(double scale) const {
  return std::visit(
      overloaded{
          [scale](const DcDrive& d) { return DriveProtocol::dc(scale * d.f0, 1.0); },
          [scale](const HarmonicDrive& d) {
            return DriveProtocol::harmonic(scale * d.f0, scale * d.f1, d.omega, 1.0);
          },
          [scale](const FourierDrive& d) {
            auto modes = d.modes;
            for (auto& m : modes) m *= scale;
            return DriveProtocol::fourier(scale * d.f0, std::move(modes), d.omega, 1.0);
          },
          [scale](const TabulatedDrive& d) {
            auto f = d.f;
            for (auto& v : f) v *= scale;
            return DriveProtocol::tabulated(d.times, std::move(f),
                                            std::vector<double>(d.times.size(), 1.0), d.periodic);
          },
      },
      v_);
}

std::string DriveProtocol::describe() const {
  return std::visit(
      overloaded{
          [](const DcDrive& d) { return fmt::format("dc(f0={}, g0={})", d.f0, d.g0); },
          [](const HarmonicDrive& d) {
            return fmt::format("harmonic(f0={}, f1={}, omega={}, g0={})", d.f0, d.f1, d.omega, d.g0);
          },
          [](const FourierDrive& d) {
            return fmt::format("fourier(f0={}, modes=[{}], omega={}, g0={})", d.f0,
                               fmt::join(d.modes, ", "), d.omega, d.g0);
          },
          [](const TabulatedDrive& d) {
            return fmt::format("tabulated({} samples, horizon={}, periodic={})", d.times.size(),
                               d.times.back(), d.periodic);
          },
      },
      v_);
}

std::vector<std::pair<double, double>> read_two_column_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError(fmt::format("cannot open table '{}'", path));
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a = 0.0, b = 0.0;
    if (!(ss >> a >> b)) {
      throw DomainError(fmt::format("{}:{}: expected two numeric columns", path, lineno));
    }
    rows.emplace_back(a, b);
  }
  return rows;
}

DriveProtocol tabulated_from_files(const std::string& field_path, const std::string& hopping_path,
                                   bool periodic) {
  const auto fr = read_two_column_table(field_path);
  const auto gr = read_two_column_table(hopping_path);
  if (fr.size() != gr.size()) {
    throw DomainError(fmt::format("'{}' has {} rows but '{}' has {}", field_path, fr.size(),
                                  hopping_path, gr.size()));
  }
  std::vector<double> t, f, g;
  for (std::size_t i = 0; i < fr.size(); ++i) {
    if (std::abs(fr[i].first - gr[i].first) > 1e-12 * std::max(1.0, std::abs(fr[i].first))) {
      throw DomainError(fmt::format("time grids differ at row {}", i + 1));
    }
    t.push_back(fr[i].first);
    f.push_back(fr[i].second);
    g.push_back(gr[i].second);
  }
  return DriveProtocol::tabulated(std::move(t), std::move(f), std::move(g), periodic);
}

cplx oscillatory_integral(double w, double t) {
  // t e^{-i x} sin(x)/x with x = w t / 2.
  const double x = 0.5 * w * t;
  double sinc = 1.0;
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    sinc = 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  } else {
    sinc = std::sin(x) / x;
  }
  return t * sinc * std::polar(1.0, -x);
}

namespace {

double table_eta(const TabulatedDrive& d, const DriveProtocol::TableCache& c, double t) {
  const double horizon = d.times.back();
  long q = 0;
  if (d.periodic) {
    std::tie(q, t) = wrap(t, horizon);
  } else if (t < 0.0 || t > horizon) {
    throw DomainError(fmt::format("t = {} outside the tabulated horizon [0, {}]", t, horizon));
  }
  const auto s = locate(d.times, t);
  return q * c.eta.back() + c.eta[s.k] + segment_eta(d, s.k, s.dt);
}

cplx table_chi(const TabulatedDrive& d, const DriveProtocol::TableCache& c, double t) {
  const double horizon = d.times.back();
  long q = 0;
  if (d.periodic) {
    std::tie(q, t) = wrap(t, horizon);
  } else if (t < 0.0 || t > horizon) {
    throw DomainError(fmt::format("t = {} outside the tabulated horizon [0, {}]", t, horizon));
  }
  const auto s = locate(d.times, t);
  const cplx local =
      c.chi[s.k] + segment_chi(d, s.k, c.eta[s.k], s.dt, kQuadratureTolerance);
  if (q == 0) return local;
  // chi(q T + r) = chi(q T) + e^{-i q eta_T} chi(r); chi(q T) = chi_T sum_{j<q} e^{-i j eta_T}.
  const double eta_T = c.eta.back();
  cplx full{};
  if (q > 0) {
    for (long j = 0; j < q; ++j) full += std::polar(1.0, -j * eta_T);
  } else {
    for (long j = q; j < 0; ++j) full -= std::polar(1.0, -j * eta_T);
  }
  return c.chi.back() * full + std::polar(1.0, -q * eta_T) * local;
}

}  // namespace

namespace {

// J_nu for nu = -V..V (index nu + V) of the harmonic or Fourier phase factor, i.e. the
// coefficients of g exp(-i eta~_t) = sum_nu a_nu e^{i nu omega t} divided by g0.
std::vector<double> phase_coefficients(const HarmonicDrive& d, int& V) {
  const double x = d.f1 / d.omega;
  V = bessel_cutoff(x, 1e-18);
  const auto j = bessel_j_range(V, std::abs(x));
  std::vector<double> c(2 * V + 1);
  for (int nu = -V; nu <= V; ++nu) {
    const int a = std::abs(nu);
    double v = j[a];
    // J_{-n}(x) = (-1)^n J_n(x), J_n(-x) = (-1)^n J_n(x)
    if (nu < 0 && (a % 2 != 0)) v = -v;
    if (x < 0 && (a % 2 != 0)) v = -v;
    c[nu + V] = v;
  }
  return c;
}

// exp(-i sum beta_m sin(m omega t)) = sum_nu J_nu({-beta}) e^{i nu omega t}.
std::vector<double> phase_coefficients(const FourierDrive& d, int& V) {
  std::vector<double> betas(d.modes.size());
  for (std::size_t m = 0; m < d.modes.size(); ++m) betas[m] = d.modes[m] / ((m + 1) * d.omega);
  if (betas.empty()) betas.push_back(0.0);
  const MultiBesselArgs args(std::move(betas));
  V = bessel_cutoff(args.bandwidth(), 1e-18) + 4;
  return bessel_j_multivar_table(V, args.negated());
}

// chi = g0 sum_nu c_nu int_0^t e^{-i omega_nu tau}, omega_nu = f0 - nu omega.
template <class Drive>
cplx periodic_chi(const DriveProtocol& p, const Drive& d, double t) {
  int V = 0;
  const auto c = phase_coefficients(d, V);
  const auto res = p.resonance();
  cplx s{};
  for (int nu = -V; nu <= V; ++nu) {
    const double coef = c[nu + V];
    if (coef == 0.0) continue;
    const double w = (res && res->order == nu) ? 0.0 : d.f0 - nu * d.omega;
    s += coef * oscillatory_integral(w, t);
  }
  return d.g0 * s;
}

}  // namespace

double eta(const DriveProtocol& p, double t) {
  return std::visit(overloaded{
                        [t](const DcDrive& d) { return d.f0 * t; },
                        [t](const HarmonicDrive& d) {
                          return d.f0 * t - d.f1 / d.omega * std::sin(d.omega * t);
                        },
                        [t](const FourierDrive& d) {
                          double s = d.f0 * t;
                          for (std::size_t m = 0; m < d.modes.size(); ++m) {
                            const double mw = (m + 1) * d.omega;
                            s += d.modes[m] / mw * std::sin(mw * t);
                          }
                          return s;
                        },
                        [&p, t](const TabulatedDrive& d) { return table_eta(d, *p.table_cache(), t); },
                    },
                    p.variant());
}

cplx chi(const DriveProtocol& p, double t) {
  return std::visit(overloaded{
                        [t](const DcDrive& d) { return d.g0 * oscillatory_integral(d.f0, t); },
                        [&p, t](const HarmonicDrive& d) { return periodic_chi(p, d, t); },
                        [&p, t](const FourierDrive& d) { return periodic_chi(p, d, t); },
                        [&p, t](const TabulatedDrive& d) { return table_chi(d, *p.table_cache(), t); },
                    },
                    p.variant());
}

cplx chi_quadrature(const DriveProtocol& p, double t) {
  auto integrand = [&p](double tau) { return p.g(tau) * std::polar(1.0, -eta(p, tau)); };
  return detail::integrate_adaptive(integrand, 0.0, t, kQuadratureTolerance, 0.25);
}

UV uv(const DriveProtocol& p, double t) {
  if (const auto* d = std::get_if<DcDrive>(&p.variant())) {
    // u = (2 g0/f0) sin(f0 t), v = (2 g0/f0)(1 - cos f0 t), written through sinc for f0 -> 0.
    const cplx c = d->g0 * oscillatory_integral(d->f0, t);
    return {2.0 * c.real(), -2.0 * c.imag()};
  }
  const cplx c = chi(p, t);
  return {2.0 * c.real(), -2.0 * c.imag()};
}

PhaseIntegrals phase_integrals(const DriveProtocol& p, double t) {
  PhaseIntegrals out;
  out.t = t;
  out.eta = eta(p, t);
  out.chi = chi(p, t);
  out.u = 2.0 * out.chi.real();
  out.v = -2.0 * out.chi.imag();
  return out;
}

cplx fourier_amplitude(const DriveProtocol& p, int nu) {
  const auto T = p.period();
  if (!T) throw DomainError(fmt::format("Fourier amplitude of aperiodic protocol {}", p.describe()));
  const double omega = kTwoPi / *T;
  const double f0 = p.mean_field();
  auto integrand = [&](double t) {
    return p.g(t) * std::polar(1.0, -nu * omega * t - (eta(p, t) - f0 * t));
  };

  if (const auto* d = std::get_if<TabulatedDrive>(&p.variant())) {
    // Piecewise smooth: integrate segment by segment.
    cplx s{};
    const double tol = 1e-12 / static_cast<double>(d->times.size());
    for (std::size_t k = 0; k + 1 < d->times.size(); ++k) {
      s += detail::integrate_adaptive(integrand, d->times[k], d->times[k + 1], tol, 0.25);
    }
    return s / *T;
  }

  // Smooth periodic integrand: the trapezoid rule converges spectrally.
  auto trapezoid = [&](int nodes) {
    cplx s{};
    const double h = *T / nodes;
    for (int k = 0; k < nodes; ++k) s += integrand(k * h);
    return s / static_cast<double>(nodes);
  };
  int nodes = 64;
  cplx prev = trapezoid(nodes);
  while (nodes < (1 << 22)) {
    nodes *= 2;
    const cplx next = trapezoid(nodes);
    if (std::abs(next - prev) < 1e-13) return next;
    prev = next;
  }
  throw ConvergenceError("Fourier amplitude quadrature did not converge");
}

DriftRate drift_rate(const DriveProtocol& p) {
  DriftRate out;
  const auto res = p.resonance();
  if (!res) return out;
  out.resonant = true;
  out.order = res->order;
  out.amplitude = fourier_amplitude(p, res->order);
  const double mag = std::abs(out.amplitude);
  if (std::abs(out.amplitude.imag()) <= 1e-12 * std::max(1.0, mag)) {
    out.gamma = 2.0 * out.amplitude.real();
  } else {
    out.gamma = 2.0 * mag;
  }
  return out;
}

}  // namespace tbdyn
