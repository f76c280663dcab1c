#include "tbdyn/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "tbdyn/error.hpp"

namespace tbdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// (K^m v)_n = v_{n+m} with the boundary semantics of `like`.
std::vector<cplx> shifted(const LatticeState& like, std::span<const cplx> v, int m) {
  const Window& w = like.window();
  const int size = w.size();
  std::vector<cplx> out(size);
  for (int i = 0; i < size; ++i) {
    const int j = i + m;
    if (like.boundary() == Boundary::open) {
      out[i] = (j >= 0 && j < size) ? v[j] : cplx{};
    } else {
      const int wraps = floor_div(j, size);
      const int jj = j - wraps * size;
      out[i] = v[jj] * std::polar(1.0, like.twist() * wraps);
    }
  }
  return out;
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

}  // namespace

LatticeState::LatticeState(Window window, std::vector<cplx> amplitudes, Boundary boundary,
                           double twist)
    : window_(window), amplitudes_(std::move(amplitudes)), boundary_(boundary), twist_(twist) {
  if (window_.size() < 1) {
    throw DomainError(fmt::format("window [{}, {}] is empty", window_.n_min, window_.n_max));
  }
  if (static_cast<int>(amplitudes_.size()) != window_.size()) {
    throw DomainError(fmt::format("{} amplitudes for a window of {} sites", amplitudes_.size(),
                                  window_.size()));
  }
}

cplx LatticeState::at(int n) const {
  const int i = n - window_.n_min;
  const int size = window_.size();
  if (boundary_ == Boundary::open) {
    return (i >= 0 && i < size) ? amplitudes_[i] : cplx{};
  }
  const int wraps = floor_div(i, size);
  return amplitudes_[i - wraps * size] * std::polar(1.0, twist_ * wraps);
}

double LatticeState::norm_squared() const noexcept {
  double s = 0.0;
  for (const auto& c : amplitudes_) s += std::norm(c);
  return s;
}

LatticeState LatticeState::normalized() const {
  const double n2 = norm_squared();
  if (!(n2 > 0.0)) throw DomainError("cannot normalize a zero-norm state");
  const double scale = 1.0 / std::sqrt(n2);
  std::vector<cplx> a(amplitudes_);
  for (auto& c : a) c *= scale;
  return {window_, std::move(a), boundary_, twist_};
}

LatticeState LatticeState::with_twist(double twist) const {
  return {window_, amplitudes_, boundary_, twist};
}

LatticeState make_state(const StateSpec& spec, Window window, Boundary boundary) {
  if (window.size() < 1) throw DomainError("window must hold at least one site");
  std::vector<cplx> amps(window.size());

  if (const auto* s = std::get_if<SingleSite>(&spec)) {
    if (!window.contains(s->site)) {
      throw DomainError(fmt::format("site {} outside window [{}, {}]", s->site, window.n_min,
                                    window.n_max));
    }
    amps[s->site - window.n_min] = 1.0;
    return {window, std::move(amps), boundary};
  }

  if (const auto* g = std::get_if<Gaussian>(&spec)) {
    if (!(g->sigma > 0.0) || !std::isfinite(g->sigma)) {
      throw DomainError(fmt::format("gaussian width must be positive, got {}", g->sigma));
    }
    const double inv = 1.0 / (4.0 * g->sigma * g->sigma);
    // |c_n|^2 falls below 1e-30 of the peak beyond 12 sigma.
    const int reach = static_cast<int>(std::ceil(12.0 * g->sigma)) + 2;
    const int lo = static_cast<int>(std::floor(g->center)) - reach;
    const int hi = static_cast<int>(std::ceil(g->center)) + reach;
    double total = 0.0;
    double inside = 0.0;
    for (int n = lo; n <= hi; ++n) {
      const double d = n - g->center;
      const double p = std::exp(-2.0 * d * d * inv);
      total += p;
      if (window.contains(n)) inside += p;
    }
    if (inside < kGaussianMassFraction * total) {
      throw DomainError(fmt::format(
          "window [{}, {}] holds only {:.3e} of the gaussian mass (center {}, sigma {})",
          window.n_min, window.n_max, inside / total, g->center, g->sigma));
    }
    for (int n = window.n_min; n <= window.n_max; ++n) {
      const double d = n - g->center;
      amps[n - window.n_min] = std::polar(std::exp(-d * d * inv), g->kappa0 * n);
    }
    return LatticeState(window, std::move(amps), boundary).normalized();
  }

  const auto& e = std::get<ExplicitAmplitudes>(spec);
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    const int n = e.first_site + static_cast<int>(k);
    if (!window.contains(n)) {
      if (e.values[k] == cplx{}) continue;
      throw DomainError(fmt::format("amplitude for site {} lies outside window [{}, {}]", n,
                                    window.n_min, window.n_max));
    }
    amps[n - window.n_min] = e.values[k];
  }
  LatticeState raw(window, std::move(amps), boundary);
  if (!(raw.norm_squared() > 0.0)) throw DomainError("amplitude list has zero norm");
  return raw.normalized();
}

ShiftResult apply_shift(const LatticeState& state, int m) {
  if (std::abs(m) > state.size()) {
    throw DomainError(
        fmt::format("shift {} exceeds window length {}", m, state.size()));
  }
  auto out = shifted(state, state.amplitudes(), m);
  LatticeState result(state.window(), std::move(out), state.boundary(), state.twist());
  const double leaked =
      state.boundary() == Boundary::open ? std::max(0.0, state.norm_squared() - result.norm_squared())
                                         : 0.0;
  return {std::move(result), leaked};
}

std::vector<double> bloch_grid(int points) {
  std::vector<double> k(points);
  for (int j = 0; j < points; ++j) k[j] = -std::numbers::pi + kTwoPi * j / points;
  return k;
}

BlochAmplitudes bloch_transform(const LatticeState& state, int points) {
  if (points < state.size()) {
    throw DomainError(fmt::format("Bloch grid of {} points aliases a window of {} sites", points,
                                  state.size()));
  }
  BlochAmplitudes out;
  out.kappa = bloch_grid(points);
  out.values.resize(points);
  const double norm = 1.0 / std::sqrt(kTwoPi);
  const auto amps = state.amplitudes();
  const int n_min = state.window().n_min;
  for (int j = 0; j < points; ++j) {
    cplx s{};
    for (int i = 0; i < state.size(); ++i) {
      if (amps[i] == cplx{}) continue;
      s += amps[i] * std::polar(1.0, -out.kappa[j] * (n_min + i));
    }
    out.values[j] = norm * s;
  }
  return out;
}

LatticeState inverse_bloch(const BlochAmplitudes& bloch, Window window) {
  const int points = static_cast<int>(bloch.points());
  if (points < window.size()) {
    throw DomainError(fmt::format("Bloch grid of {} points aliases a window of {} sites", points,
                                  window.size()));
  }
  const double scale = std::sqrt(kTwoPi) / points;
  std::vector<cplx> amps(window.size());
  for (int n = window.n_min; n <= window.n_max; ++n) {
    cplx s{};
    for (int j = 0; j < points; ++j) s += bloch.values[j] * std::polar(1.0, bloch.kappa[j] * n);
    amps[n - window.n_min] = scale * s;
  }
  return {window, std::move(amps)};
}

cplx shift_moment(const LatticeState& state, int m) {
  // <K^m> = <psi| K^m psi> with (K^m psi)_n = psi_{n+m}.
  return inner(state.amplitudes(), shifted(state, state.amplitudes(), m));
}

std::pair<double, double> position_moments(const LatticeState& state) {
  double m1 = 0.0;
  double m2 = 0.0;
  const auto amps = state.amplitudes();
  for (int i = 0; i < state.size(); ++i) {
    const double n = state.window().n_min + i;
    const double p = std::norm(amps[i]);
    m1 += n * p;
    m2 += n * n * p;
  }
  return {m1, m2};
}

CoherenceParameters coherence_parameters(const LatticeState& state) {
  CoherenceParameters c;
  const auto amps = state.amplitudes();
  const int n_min = state.window().n_min;

  std::vector<cplx> n_psi(amps.size());
  for (std::size_t i = 0; i < amps.size(); ++i) n_psi[i] = static_cast<double>(n_min + static_cast<int>(i)) * amps[i];

  const auto k_psi = shifted(state, amps, 1);
  const auto k_npsi = shifted(state, n_psi, 1);
  c.K = inner(amps, k_psi);
  c.L = shift_moment(state, 2);
  // <N K + K N> = <N psi | K psi> + <psi | K N psi>
  c.J = inner(n_psi, k_psi) + inner(amps, k_npsi);
  std::tie(c.n_mean, c.n2_mean) = position_moments(state);

  const double mc = c.K.real();
  const double ms = c.K.imag();
  auto& cov = c.covariance;
  cov[kC][kC] = 0.5 * (1.0 + c.L.real()) - mc * mc;
  cov[kS][kS] = 0.5 * (1.0 - c.L.real()) - ms * ms;
  cov[kC][kS] = cov[kS][kC] = 0.5 * c.L.imag() - mc * ms;
  cov[kC][kN] = cov[kN][kC] = 0.5 * c.J.real() - mc * c.n_mean;
  cov[kS][kN] = cov[kN][kS] = 0.5 * c.J.imag() - ms * c.n_mean;
  cov[kN][kN] = c.n2_mean - c.n_mean * c.n_mean;
  return c;
}

double fidelity(const LatticeState& a, const LatticeState& b) {
  const int lo = std::min(a.window().n_min, b.window().n_min);
  const int hi = std::max(a.window().n_max, b.window().n_max);
  cplx s{};
  for (int n = lo; n <= hi; ++n) {
    const cplx x = a.window().contains(n) ? a.amplitudes()[n - a.window().n_min] : cplx{};
    const cplx y = b.window().contains(n) ? b.amplitudes()[n - b.window().n_min] : cplx{};
    s += std::conj(x) * y;
  }
  return std::abs(s);
}

double max_amplitude_deviation(const LatticeState& a, const LatticeState& b) {
  const int lo = std::min(a.window().n_min, b.window().n_min);
  const int hi = std::max(a.window().n_max, b.window().n_max);
  double dev = 0.0;
  for (int n = lo; n <= hi; ++n) {
    const cplx x = a.window().contains(n) ? a.amplitudes()[n - a.window().n_min] : cplx{};
    const cplx y = b.window().contains(n) ? b.amplitudes()[n - b.window().n_min] : cplx{};
    dev = std::max(dev, std::abs(x - y));
  }
  return dev;
}

}  // namespace tbdyn
