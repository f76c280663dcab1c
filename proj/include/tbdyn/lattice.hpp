#pragma once

#include <array>
#include <complex>
#include <span>
#include <variant>
#include <vector>

namespace tbdyn {

using cplx = std::complex<double>;

/// Closed interval of site labels [n_min, n_max].
struct Window {
  int n_min = 0;
  int n_max = 0;

  int size() const noexcept { return n_max - n_min + 1; }
  bool contains(int n) const noexcept { return n >= n_min && n <= n_max; }
  friend bool operator==(const Window&, const Window&) = default;
};

/// Open windows truncate; rings close the window on itself with a twist phase.
enum class Boundary { open, ring };

/// Amplitudes c_n of a pure state on a finite window of Wannier sites.
///
/// On a ring the amplitudes are extended quasi-periodically,
/// c_{n+L} = e^{i twist} c_n, so the shift operator stays unitary and a
/// static field enters only through the evolution of the twist.
class LatticeState {
 public:
  LatticeState(Window window, std::vector<cplx> amplitudes, Boundary boundary = Boundary::open,
               double twist = 0.0);

  const Window& window() const noexcept { return window_; }
  Boundary boundary() const noexcept { return boundary_; }
  double twist() const noexcept { return twist_; }
  int size() const noexcept { return window_.size(); }

  std::span<const cplx> amplitudes() const noexcept { return amplitudes_; }
  std::span<cplx> amplitudes() noexcept { return amplitudes_; }

  /// Amplitude at site n; zero outside an open window, quasi-periodic on a ring.
  cplx at(int n) const;

  double norm_squared() const noexcept;
  LatticeState normalized() const;

  LatticeState with_twist(double twist) const;

 private:
  Window window_;
  std::vector<cplx> amplitudes_;
  Boundary boundary_;
  double twist_;
};

struct SingleSite {
  int site = 0;
};

/// c_n proportional to exp(-(n - center)^2 / (4 sigma^2) + i kappa0 n).
struct Gaussian {
  double center = 0.0;
  double sigma = 1.0;
  double kappa0 = 0.0;
};

/// Explicit amplitudes placed at consecutive sites starting at first_site.
struct ExplicitAmplitudes {
  int first_site = 0;
  std::vector<cplx> values;
};

using StateSpec = std::variant<SingleSite, Gaussian, ExplicitAmplitudes>;

/// Gaussian mass that must fit inside the window.
inline constexpr double kGaussianMassFraction = 1.0 - 1e-8;

LatticeState make_state(const StateSpec& spec, Window window, Boundary boundary = Boundary::open);

struct ShiftResult {
  LatticeState state;
  double leaked = 0.0;
};

/// Applies K^m, i.e. K^m |n> = |n - m>. Amplitude pushed off an open window is dropped
/// and reported.
ShiftResult apply_shift(const LatticeState& state, int m);

/// psi(kappa_j) = (2 pi)^{-1/2} sum_n c_n e^{-i n kappa_j} on kappa_j = -pi + 2 pi j / M.
struct BlochAmplitudes {
  std::vector<double> kappa;
  std::vector<cplx> values;

  std::size_t points() const noexcept { return values.size(); }
};

BlochAmplitudes bloch_transform(const LatticeState& state, int points);
LatticeState inverse_bloch(const BlochAmplitudes& bloch, Window window);

/// Bloch grid kappa_j = -pi + 2 pi j / M.
std::vector<double> bloch_grid(int points);

enum CovarianceIndex : int { kC = 0, kS = 1, kN = 2 };

/// Coherence data of a state: <K>, <J> with J = NK + KN, <K^2>, position moments and the
/// symmetrized covariances of C = (K + K^dag)/2, S = (K - K^dag)/(2i) and N.
struct CoherenceParameters {
  cplx K;
  cplx J;
  cplx L;
  double n_mean = 0.0;
  double n2_mean = 0.0;
  std::array<std::array<double, 3>, 3> covariance{};

  double mean_C() const noexcept { return K.real(); }
  double mean_S() const noexcept { return K.imag(); }
  double variance_N() const noexcept { return covariance[kN][kN]; }
};

CoherenceParameters coherence_parameters(const LatticeState& state);

/// <K^m> = sum_n c*_{n-m} c_n; m may be negative.
cplx shift_moment(const LatticeState& state, int m);

/// Position moments sum n |c_n|^2 and sum n^2 |c_n|^2.
std::pair<double, double> position_moments(const LatticeState& state);

/// |<a|b>| over the union of both windows (open semantics).
double fidelity(const LatticeState& a, const LatticeState& b);

/// max_n |a_n - b_n| over the union of both windows.
double max_amplitude_deviation(const LatticeState& a, const LatticeState& b);

}  // namespace tbdyn
