#pragma once

#include <cmath>
#include <limits>

#include "revtone/error.hpp"

namespace revtone::roots {

/// Bisection for a sign change of f on [lo, hi].  Stops once the bracket is
/// narrower than `tol` or can no longer be split in floating point.
template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) fail(ErrorKind::NumericalFailure, "bisect: root not bracketed");
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= tol || mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Safeguarded Newton iteration for an increasing function.
///
/// `fdf(x)` returns {f(x), f'(x)} with f(lo) < 0 < f(hi).  Newton steps that
/// leave the current bracket fall back to bisection; the bracket shrinks on
/// every evaluation.
template <class FdF>
double newton_increasing(FdF&& fdf, double lo, double hi, double x, double ftol, int max_iter = 200) {
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  double best = x;
  double best_abs = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const auto [f, df] = fdf(x);
    if (std::abs(f) < best_abs) {
      best_abs = std::abs(f);
      best = x;
    }
    if (f == 0.0) return x;
    if (f < 0) lo = x; else hi = x;
    double next = x - f / df;
    const bool converged_step = std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x);
    if (std::abs(f) <= ftol && converged_step) return next > lo && next < hi ? next : x;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) return best;
    x = next;
  }
  if (best_abs > ftol) fail(ErrorKind::NumericalFailure, "newton_increasing: no convergence");
  return best;
}

}  // namespace revtone::roots
