#include "tbdyn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "tbdyn/error.hpp"

namespace tbdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Vec = std::vector<cplx>;

// State of the ODE: amplitudes plus the ring twist, which moves as theta' = -L f_t.
struct Point {
  Vec c;
  double twist = 0.0;
};

// Writes -i H_t c into out given the twist; `hop` adds the hopping part to h.
using HoppingTerm = std::function<void(const Window&, Boundary, double, double, const Vec&, Vec&)>;

class System {
 public:
  System(Window w, Boundary b, std::function<double(double)> field, HoppingTerm hop)
      : w_(w), b_(b), field_(std::move(field)), hop_(std::move(hop)), h_(w.size()) {}

  void rhs(double t, const Point& y, Point& dy) {
    const double f = field_(t);
    std::fill(h_.begin(), h_.end(), cplx{});
    hop_(w_, b_, t, y.twist, y.c, h_);
    dy.c.resize(y.c.size());
    for (int i = 0; i < w_.size(); ++i) {
      const cplx hc = h_[i] + f * double(w_.n_min + i) * y.c[i];
      dy.c[i] = cplx(hc.imag(), -hc.real());
    }
    dy.twist = b_ == Boundary::ring ? -w_.size() * f : 0.0;
  }

  const Window& window() const { return w_; }
  Boundary boundary() const { return b_; }

 private:
  Window w_;
  Boundary b_;
  std::function<double(double)> field_;
  HoppingTerm hop_;
  Vec h_;
};

// c_{n+m} with open truncation or quasi-periodic extension.
cplx neighbour(const Window& w, Boundary b, double twist, const Vec& c, int i, int m) {
  int j = i + m;
  const int L = w.size();
  if (b == Boundary::open) return (j >= 0 && j < L) ? c[j] : cplx{};
  // j = j_mod + wraps L; c_{n + wraps L} = e^{i wraps twist} c_n.
  int wraps = j >= 0 ? j / L : -((-j + L - 1) / L);
  j -= wraps * L;
  return wraps == 0 ? c[j] : std::polar(1.0, wraps * twist) * c[j];
}

void rk4_step(System& sys, double t, double h, const Point& y, Point& out) {
  Point k1, k2, k3, k4, tmp;
  auto axpy = [](const Point& a, double s, const Point& d, Point& r) {
    r.c.resize(a.c.size());
    for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] = a.c[i] + s * d.c[i];
    r.twist = a.twist + s * d.twist;
  };
  sys.rhs(t, y, k1);
  axpy(y, 0.5 * h, k1, tmp);
  sys.rhs(t + 0.5 * h, tmp, k2);
  axpy(y, 0.5 * h, k2, tmp);
  sys.rhs(t + 0.5 * h, tmp, k3);
  axpy(y, h, k3, tmp);
  sys.rhs(t + h, tmp, k4);
  out.c.resize(y.c.size());
  for (std::size_t i = 0; i < y.c.size(); ++i) {
    out.c[i] = y.c[i] + h / 6.0 * (k1.c[i] + 2.0 * k2.c[i] + 2.0 * k3.c[i] + k4.c[i]);
  }
  out.twist = y.twist + h / 6.0 * (k1.twist + 2.0 * k2.twist + 2.0 * k3.twist + k4.twist);
}

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.c.size(); ++i) s += std::norm(a.c[i] - b.c[i]);
  return std::sqrt(s);
}

double edge_mass(const Vec& c, int layer) {
  const int L = static_cast<int>(c.size());
  const int k = std::min(layer, L / 2);
  double m = 0.0;
  for (int i = 0; i < k; ++i) m += std::norm(c[i]) + std::norm(c[L - 1 - i]);
  return m;
}

double default_dt(const DriveProtocol& p) {
  const double f0 = p.mean_field();
  const double tb = f0 != 0.0 ? kTwoPi / std::abs(f0) : kTwoPi;
  return tb / 2000.0;
}

OracleResult run(System& sys, const LatticeState& state0, double t0, double t1, double dt0,
                 const OracleConfig& cfg) {
  if (!(dt0 > 0.0)) throw DomainError("oracle step must be positive");
  const auto& w = sys.window();
  Point y{Vec(state0.amplitudes().begin(), state0.amplitudes().end()), state0.twist()};
  const double norm0 = state0.norm_squared();

  OracleResult r{state0, 0.0, 0.0, 0.0, 0};
  auto check_leak = [&](const Vec& c) {
    if (sys.boundary() != Boundary::open) return;
    r.leaked = std::max(r.leaked, edge_mass(c, cfg.edge_layer));
    if (r.leaked > cfg.leak_tolerance) {
      throw LeakError(fmt::format("oracle: probability {:.3e} reached the window edge "
                                  "(tolerance {:.1e})",
                                  r.leaked, cfg.leak_tolerance),
                      r.leaked);
    }
  };
  check_leak(y.c);

  const double span = t1 - t0;
  const double dir = span >= 0.0 ? 1.0 : -1.0;
  double t = t0;
  Point full, half, two;

  if (!cfg.adaptive) {
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / dt0 - 1e-9)));
    const double h = span / n;
    for (long i = 0; i < n; ++i) {
      rk4_step(sys, t0 + i * h, h, y, full);
      y = full;
      check_leak(y.c);
    }
    r.steps = n;
  } else {
    double h = dt0;
    while (dir * (t1 - t) > 0.0) {
      const bool last = h >= std::abs(t1 - t);
      const double step = last ? (t1 - t) : dir * h;
      rk4_step(sys, t, step, y, full);
      rk4_step(sys, t, 0.5 * step, y, half);
      rk4_step(sys, t + 0.5 * step, 0.5 * step, half, two);
      const double err = distance(full, two) / 15.0;
      const double allowed = cfg.tolerance * std::abs(step);
      if (err <= allowed) {
        y = two;
        t = last ? t1 : t + step;
        r.error_estimate += err;
        ++r.steps;
        check_leak(y.c);
      }
      const double grow = err > 0.0 ? 0.9 * std::pow(allowed / err, 0.2) : 2.0;
      h = std::abs(step) * std::clamp(grow, 0.2, 2.0);
      if (h < cfg.min_dt) {
        throw ConvergenceError(fmt::format("oracle step size underflow at t = {:.6g}", t));
      }
    }
  }

  LatticeState out(w, std::move(y.c), sys.boundary(),
                   sys.boundary() == Boundary::ring ? std::remainder(y.twist, kTwoPi) : 0.0);
  r.norm_drift = std::abs(out.norm_squared() - norm0);
  r.state = std::move(out);
  return r;
}

}  // namespace

OracleResult integrate(const LatticeState& state0, const DriveProtocol& protocol, double t0,
                       double t1, const OracleConfig& config) {
  HoppingTerm hop = [&protocol](const Window& w, Boundary b, double t, double twist, const Vec& c,
                                Vec& h) {
    const double g = protocol.g(t);
    if (g == 0.0) return;
    for (int i = 0; i < w.size(); ++i) {
      h[i] += g * (neighbour(w, b, twist, c, i, 1) + neighbour(w, b, twist, c, i, -1));
    }
  };
  System sys(state0.window(), state0.boundary(), [&protocol](double t) { return protocol.f(t); },
             hop);
  const double dt = config.dt > 0.0 ? config.dt : default_dt(protocol);
  return run(sys, state0, t0, t1, dt, config);
}

OracleResult integrate(const LatticeState& state0, const DriveProtocol& protocol, double t,
                       const OracleConfig& config) {
  return integrate(state0, protocol, 0.0, t, config);
}

OracleResult integrate(const LatticeState& state0, const SingleBandDispersion& dispersion,
                       const DriveProtocol& field, double t0, double t1,
                       const OracleConfig& config) {
  const auto& g = dispersion.couplings();
  HoppingTerm hop = [&g](const Window& w, Boundary b, double, double twist, const Vec& c, Vec& h) {
    for (int i = 0; i < w.size(); ++i) {
      cplx acc = 2.0 * g[0].real() * c[i];
      for (std::size_t m = 1; m < g.size(); ++m) {
        if (g[m] == cplx{}) continue;
        const int mm = static_cast<int>(m);
        acc += g[m] * neighbour(w, b, twist, c, i, mm) +
               std::conj(g[m]) * neighbour(w, b, twist, c, i, -mm);
      }
      h[i] += acc;
    }
  };
  System sys(state0.window(), state0.boundary(), [&field](double t) { return field.f(t); }, hop);
  const double dt = config.dt > 0.0 ? config.dt : default_dt(field);
  return run(sys, state0, t0, t1, dt, config);
}

OracleResult integrate(const LatticeState& state0, const SingleBandDispersion& dispersion,
                       const DriveProtocol& field, double t, const OracleConfig& config) {
  return integrate(state0, dispersion, field, 0.0, t, config);
}

MonodromySpectrum monodromy_spectrum(const DriveProtocol& protocol, int ring_sites,
                                     const OracleConfig& config) {
  const auto res = protocol.resonance();
  if (!res) {
    throw DomainError(
        fmt::format("monodromy needs a resonant periodic drive, got {}", protocol.describe()));
  }
  if (ring_sites < 8) throw DomainError("monodromy ring needs at least 8 sites");
  const int L = ring_sites;
  const Window w{-L / 2, -L / 2 + L - 1};
  const double T = res->period;

  OracleConfig cfg = config;
  if (cfg.dt <= 0.0) cfg.dt = T / 2000.0;

  Eigen::MatrixXcd U(L, L);
  for (int col = 0; col < L; ++col) {
    std::vector<cplx> e(L);
    e[col] = 1.0;
    const auto r = integrate(LatticeState(w, std::move(e), Boundary::ring, 0.0), protocol, 0.0, T, cfg);
    // After a full period the twist returns to a multiple of 2 pi.
    if (std::abs(std::remainder(r.state.twist(), kTwoPi)) > 1e-6) {
      throw ConvergenceError("monodromy: ring twist did not return after one period");
    }
    for (int row = 0; row < L; ++row) U(row, col) = r.state.amplitudes()[row];
  }

  MonodromySpectrum s;
  s.period = T;
  s.unitarity_error =
      (U.adjoint() * U - Eigen::MatrixXcd::Identity(L, L)).operatorNorm();
  if (s.unitarity_error > 1e-7) {
    throw ConvergenceError(
        fmt::format("monodromy is not unitary: ||U^dag U - 1|| = {:.3e}", s.unitarity_error));
  }

  // Columns of F are the ring Bloch states |kappa_j> / sqrt(L).
  Eigen::MatrixXcd F(L, L);
  std::vector<double> kappa(L);
  for (int j = 0; j < L; ++j) {
    kappa[j] = std::remainder(kTwoPi * j / L, kTwoPi);
    if (kappa[j] >= std::numbers::pi) kappa[j] -= kTwoPi;
    for (int i = 0; i < L; ++i) {
      F(i, j) = std::polar(1.0 / std::sqrt(double(L)), (w.n_min + i) * kappa[j]);
    }
  }
  const Eigen::MatrixXcd D = F.adjoint() * U * F;

  std::vector<int> order(L);
  for (int j = 0; j < L; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return kappa[a] < kappa[b]; });
  for (int j : order) {
    s.kappa.push_back(kappa[j]);
    double eps = -std::arg(D(j, j)) / T;
    const double zone = kTwoPi / T;
    eps -= zone * std::floor(eps / zone + 0.5);
    s.quasienergy.push_back(eps);
  }
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      if (i != j) s.off_diagonal = std::max(s.off_diagonal, std::abs(D(i, j)));
    }
  }
  return s;
}

}  // namespace tbdyn
