#pragma once

#include <cmath>
#include <cstdlib>

#include "tbdyn/error.hpp"

namespace tbdyn::detail {

// Adaptive Simpson with Richardson correction; accepts a panel once the halved estimate
// moves by less than 15 tol. Works for any integrand whose value type supports abs().
template <class F, class R>
R simpson_panel(const F& f, double a, double b, R fa, R fm, R fb, R whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const R flm = f(lm);
  const R frm = f(rm);
  const R left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const R right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const R delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    if (depth <= 0 && std::abs(delta) > 15.0 * tol) {
      throw ConvergenceError("adaptive quadrature exceeded its refinement depth");
    }
    return left + right + delta / 15.0;
  }
  return simpson_panel(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_panel(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// int_a^b f with absolute tolerance `tol`, after splitting into panels no wider than `panel`.
template <class F>
auto integrate_adaptive(const F& f, double a, double b, double tol, double panel = 0.25) {
  using R = decltype(f(a));
  R total{};
  if (a == b) return total;
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / panel)));
  const double h = (b - a) / panels;
  const double panel_tol = tol / panels;
  R fa = f(a);
  for (int k = 0; k < panels; ++k) {
    const double x0 = a + k * h;
    const double x1 = (k + 1 == panels) ? b : a + (k + 1) * h;
    const double xm = 0.5 * (x0 + x1);
    const R fm = f(xm);
    const R fb = f(x1);
    const R whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_panel(f, x0, x1, fa, fm, fb, whole, panel_tol, 40);
    fa = fb;
  }
  return total;
}

}  // namespace tbdyn::detail
