#pragma once

// Independent reference tools for the tests: dense matrices, brute-force quadrature and
// random states. Nothing here calls the closed-form code paths.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tbdyn/lattice.hpp"

namespace tbdyn::test {

using cplx = std::complex<double>;

inline LatticeState random_state(std::mt19937_64& rng, Window window, int first, int last,
                                 Boundary boundary = Boundary::open) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<cplx> v(window.size());
  for (int s = first; s <= last; ++s) v[s - window.n_min] = {n(rng), n(rng)};
  return LatticeState(window, std::move(v), boundary).normalized();
}

inline Eigen::VectorXcd to_vector(const LatticeState& s) {
  Eigen::VectorXcd v(s.size());
  for (int i = 0; i < s.size(); ++i) v[i] = s.amplitudes()[i];
  return v;
}

inline LatticeState from_vector(const Window& w, const Eigen::VectorXcd& v,
                                Boundary b = Boundary::open, double twist = 0.0) {
  return LatticeState(w, std::vector<cplx>(v.data(), v.data() + v.size()), b, twist);
}

/// Matrix of the shift K (K|n> = |n-1>) on an open window.
inline Eigen::MatrixXcd shift_matrix(const Window& w) {
  const int L = w.size();
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(L, L);
  for (int i = 1; i < L; ++i) k(i - 1, i) = 1.0;
  return k;
}

inline Eigen::MatrixXcd number_matrix(const Window& w) {
  const int L = w.size();
  Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(L, L);
  for (int i = 0; i < L; ++i) n(i, i) = double(w.n_min + i);
  return n;
}

/// exp(-i H t) for a hermitian H by diagonalization.
inline Eigen::MatrixXcd unitary(const Eigen::MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXd e = es.eigenvalues();
  Eigen::VectorXcd phase(e.size());
  for (int i = 0; i < e.size(); ++i) phase[i] = std::polar(1.0, -e[i] * t);
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

/// Composite Simpson rule with n (even) panels.
template <class F>
auto simpson(const F& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  auto s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * (h / 3.0);
}

}  // namespace tbdyn::test
