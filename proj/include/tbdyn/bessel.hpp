#pragma once

#include <vector>

namespace tbdyn {

/// Largest |x| accepted by bessel_j.
inline constexpr double kBesselArgumentLimit = 1e6;

/// Integer-order Bessel function of the first kind J_n(x).
///
/// Computed by Miller's backward recurrence normalized with
/// J_0 + 2 sum_k J_{2k} = 1, with a power series for |x| <= 1. Absolute error
/// stays below 1e-12 for |n| <= 200 and |x| <= 500.
double bessel_j(int n, double x);

/// J_0(x) ... J_{n_max}(x) from a single recurrence sweep.
std::vector<double> bessel_j_range(int n_max, double x);

/// Smallest order m >= |x| beyond which |J_k(x)| < tol for every k >= m.
int bessel_cutoff(double x, double tol = 1e-16);

/// Truncated argument list {beta_m}, m = 1..M, of a many-variable Bessel function.
class MultiBesselArgs {
 public:
  explicit MultiBesselArgs(std::vector<double> betas);

  const std::vector<double>& betas() const noexcept { return betas_; }
  /// sum_m m |beta_m|, the highest frequency carried by the phase sum_m beta_m sin(m u).
  double bandwidth() const noexcept;
  double l1_norm() const noexcept;
  MultiBesselArgs negated() const;

 private:
  std::vector<double> betas_;
};

/// J_nu({beta_m}) = (1/2pi) int_0^{2pi} exp(i sum_m beta_m sin(m u) - i nu u) du.
///
/// Trapezoidal quadrature on the periodic integrand, doubling the node count until
/// successive values differ by less than 1e-11.
double bessel_j_multivar(int nu, const MultiBesselArgs& args);

/// J_nu({beta_m}) for nu = -nu_max .. nu_max (index nu + nu_max) from one converged
/// quadrature.
std::vector<double> bessel_j_multivar_table(int nu_max, const MultiBesselArgs& args);

/// k-th positive zero of J_n, n in [0, 50], k in [1, 50].
double bessel_zero(int n, int k);

}  // namespace tbdyn
