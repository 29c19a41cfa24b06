#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "revtone/error.hpp"

namespace revtone::tridiag {

/// Real symmetric tridiagonal matrix: diagonal d (n) and off-diagonal e (n-1).
struct SymTridiagonal {
  std::vector<double> d;
  std::vector<double> e;

  std::size_t size() const { return d.size(); }
};

inline double pivot_floor(const SymTridiagonal& t) {
  double emax = 1.0;
  for (double x : t.e) emax = std::max(emax, x * x);
  return std::numeric_limits<double>::min() * emax;
}

/// Sturm count: number of eigenvalues strictly below sigma (LDL^T inertia).
inline std::size_t count_below(const SymTridiagonal& t, double sigma, double pivmin) {
  std::size_t count = 0;
  double q = t.d[0] - sigma;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < t.d.size(); ++i) {
    q = t.d[i] - sigma - t.e[i - 1] * t.e[i - 1] / q;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0) ++count;
  }
  return count;
}

/// Gershgorin interval containing the whole spectrum.
inline std::pair<double, double> gershgorin(const SymTridiagonal& t) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(t.e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(t.e[i]) : 0.0);
    lo = std::min(lo, t.d[i] - r);
    hi = std::max(hi, t.d[i] + r);
  }
  return {lo, hi};
}

/// The k-th smallest eigenvalue (k = 0, 1, ...) by bisection on the Sturm
/// count, to a relative width of a few ulps.
inline double eigenvalue(const SymTridiagonal& t, std::size_t k) {
  if (k >= t.size()) fail(ErrorKind::InvalidParameter, "eigenvalue index out of range");
  const double pivmin = pivot_floor(t);
  auto [lo, hi] = gershgorin(t);
  // The wanted eigenvalues sit at the bottom of a widely graded spectrum, so
  // grow an upper bracket from the lower Gershgorin bound instead of
  // bisecting down from the top.
  double step = std::max(1.0, std::abs(lo));
  double probe = lo + step;
  while (probe < hi && count_below(t, probe, pivmin) <= k) {
    lo = probe;
    step *= 2.0;
    probe = lo + step;
  }
  hi = std::min(hi, probe);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi)) + pivmin || mid <= lo || mid >= hi) break;
    if (count_below(t, mid, pivmin) <= k) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Solves (T - shift) x = b in place with partial pivoting; zero pivots are
/// replaced by a tiny multiple of the matrix scale.
inline void shifted_solve(const SymTridiagonal& t, double shift, std::span<double> b) {
  const std::size_t n = t.size();
  std::vector<double> dl(t.e), d(n), du(t.e), du2(n, 0.0);
  std::vector<char> swapped(n, 0);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = t.d[i] - shift;
    scale = std::max(scale, std::abs(d[i]));
  }
  const double tiny = std::max(scale, 1.0) * std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = tiny;
      const double l = dl[i] / d[i];
      dl[i] = l;
      d[i + 1] -= l * du[i];
    } else {
      const double l = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = l;
      const double tmp = d[i + 1];
      d[i + 1] = du[i] - l * tmp;
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -l * du[i + 1];
      }
      du[i] = tmp;
      swapped[i] = 1;
    }
  }
  if (d[n - 1] == 0.0) d[n - 1] = tiny;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!swapped[i]) {
      b[i + 1] -= dl[i] * b[i];
    } else {
      const double tmp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = tmp - dl[i] * b[i];
    }
  }
  b[n - 1] /= d[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  for (std::size_t i = n - 2; i-- > 0;) b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
}

/// Unit eigenvector for an accurately known eigenvalue by inverse iteration.
inline std::vector<double> eigenvector(const SymTridiagonal& t, double lambda, int iterations = 3) {
  const std::size_t n = t.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.25 * std::sin(0.37 * static_cast<double>(i));
  for (int it = 0; it < iterations; ++it) {
    shifted_solve(t, lambda, x);
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) fail(ErrorKind::NumericalFailure, "inverse iteration broke down");
    for (double& v : x) v /= norm;
  }
  return x;
}

}  // namespace revtone::tridiag
