#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tbdyn {

using cplx = std::complex<double>;

/// Static field f_t = f0 and hopping g_t = g0.
struct DcDrive {
  double f0 = 0.0;
  double g0 = 0.0;
};

/// f_t = f0 - f1 cos(omega t), g_t = g0.
struct HarmonicDrive {
  double f0 = 0.0;
  double f1 = 0.0;
  double omega = 1.0;
  double g0 = 0.0;
};

/// f_t = f0 + sum_m f_m cos(m omega t), g_t = g0.
struct FourierDrive {
  double f0 = 0.0;
  std::vector<double> modes;
  double omega = 1.0;
  double g0 = 0.0;
};

/// Samples of f_t and g_t, linearly interpolated; times start at 0.
/// A periodic table repeats with period times.back().
struct TabulatedDrive {
  std::vector<double> times;
  std::vector<double> f;
  std::vector<double> g;
  bool periodic = false;
};

/// Relative tolerance used to recognise omega_B / omega as an integer.
inline constexpr double kResonanceTolerance = 1e-9;

/// Integer ratio n = omega_B / omega of a resonant periodic drive.
struct Resonance {
  int order = 0;
  double omega = 0.0;
  double period = 0.0;
  double bloch_frequency = 0.0;
};

/// Immutable field protocol (f_t, g_t) in reduced units (hbar = d = 1).
class DriveProtocol {
 public:
  using Variant = std::variant<DcDrive, HarmonicDrive, FourierDrive, TabulatedDrive>;

  static DriveProtocol dc(double f0, double g0);
  static DriveProtocol harmonic(double f0, double f1, double omega, double g0);
  static DriveProtocol fourier(double f0, std::vector<double> modes, double omega, double g0);
  static DriveProtocol tabulated(std::vector<double> times, std::vector<double> f,
                                 std::vector<double> g, bool periodic);

  explicit DriveProtocol(Variant v);

  const Variant& variant() const noexcept { return v_; }

  double f(double t) const;
  double g(double t) const;

  /// Period of the drive, if it has one (dc has none).
  std::optional<double> period() const;
  /// Mean field over a period (f0 for analytic variants).
  double mean_field() const;
  std::optional<Resonance> resonance() const;

  /// Copy with the field multiplied by `scale` and a unit hopping: its chi is
  /// int_0^t exp(-i scale eta_tau) d tau.
  DriveProtocol field_phase_protocol(double scale) const;

  std::string describe() const;

  struct TableCache;
  /// Node values of eta and chi for tabulated drives; null otherwise.
  const TableCache* table_cache() const noexcept { return cache_.get(); }

 private:
  Variant v_;
  std::shared_ptr<const TableCache> cache_;
};

/// Reads a whitespace separated table with two numeric columns (comment lines start with '#').
std::vector<std::pair<double, double>> read_two_column_table(const std::string& path);

/// Builds a tabulated protocol from a (t, f) table and a (t, g) table on the same time grid.
DriveProtocol tabulated_from_files(const std::string& field_path, const std::string& hopping_path,
                                   bool periodic);

/// eta_t = int_0^t f.
double eta(const DriveProtocol& p, double t);
/// chi_t = int_0^t g_tau exp(-i eta_tau) d tau from the closed form of the protocol
/// (adaptive quadrature for tables).
cplx chi(const DriveProtocol& p, double t);
/// chi_t by adaptive quadrature of the defining integral, for any protocol.
cplx chi_quadrature(const DriveProtocol& p, double t);

struct UV {
  double u = 0.0;
  double v = 0.0;
};

/// u_t = 2 int g cos(eta), v_t = 2 int g sin(eta); 2 chi = u - i v.
UV uv(const DriveProtocol& p, double t);

/// eta, chi = |chi| e^{-i phi}, u and v at one time.
struct PhaseIntegrals {
  double t = 0.0;
  double eta = 0.0;
  cplx chi;
  double u = 0.0;
  double v = 0.0;

  double chi_abs() const { return std::abs(chi); }
  /// phi_t with chi_t = |chi_t| e^{-i phi_t}.
  double phi() const { return -std::arg(chi); }
};

PhaseIntegrals phase_integrals(const DriveProtocol& p, double t);

/// a_nu = (1/T) int_0^T g_t exp(-i nu omega t - i eta~_t) dt with eta~_t = eta_t - f0 t.
cplx fourier_amplitude(const DriveProtocol& p, int nu);

/// Secular growth of chi for resonant drives: chi_t = a_n t + periodic.
struct DriftRate {
  bool resonant = false;
  int order = 0;
  cplx amplitude;
  /// 2 a_n when a_n is real (sign kept), 2 |a_n| otherwise; 0 off resonance.
  double gamma = 0.0;
};

DriftRate drift_rate(const DriveProtocol& p);

/// int_0^t exp(-i w tau) d tau, stable through w t -> 0.
cplx oscillatory_integral(double w, double t);

}  // namespace tbdyn
