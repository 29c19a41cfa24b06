#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "revtone/error.hpp"

namespace revtone::interp {

/// Chebyshev-Lobatto nodes mapped to [a, b], ordered from a to b.
inline std::vector<double> lobatto_nodes(double a, double b, int n) {
  std::vector<double> x(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double t = -std::cos(std::numbers::pi * j / n);
    x[j] = 0.5 * (a + b) + 0.5 * (b - a) * t;
  }
  x.front() = a;
  x.back() = b;
  return x;
}

/// Barycentric interpolant through values on the nodes from `lobatto_nodes`.
class Barycentric {
 public:
  Barycentric() = default;
  Barycentric(std::vector<double> nodes, std::vector<double> values)
      : x_(std::move(nodes)), f_(std::move(values)), w_(x_.size()) {
    const std::size_t n = x_.size();
    if (n < 2 || f_.size() != n) fail(ErrorKind::InvalidParameter, "barycentric: bad node set");
    for (std::size_t j = 0; j < n; ++j) w_[j] = (j % 2 == 0 ? 1.0 : -1.0) * (j == 0 || j + 1 == n ? 0.5 : 1.0);
  }

  double operator()(double x) const {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
      const double d = x - x_[j];
      if (d == 0.0) return f_[j];
      const double t = w_[j] / d;
      num += t * f_[j];
      den += t;
    }
    return num / den;
  }

 private:
  std::vector<double> x_, f_, w_;
};

/// Truncated Chebyshev series on [a, b], built from samples at first-kind
/// nodes, so the endpoints themselves are never evaluated.
class ChebyshevSeries {
 public:
  ChebyshevSeries() = default;

  template <class F>
  static ChebyshevSeries fit(F&& f, double a, double b, int n) {
    if (n < 2) fail(ErrorKind::InvalidParameter, "chebyshev fit needs n >= 2");
    std::vector<double> vals(n);
    for (int j = 0; j < n; ++j) {
      const double t = std::cos(std::numbers::pi * (n - 1 - j + 0.5) / n);
      vals[j] = f(0.5 * (a + b) + 0.5 * (b - a) * t);
    }
    ChebyshevSeries s;
    s.a_ = a;
    s.b_ = b;
    s.c_.assign(n, 0.0);
    for (int k = 0; k < n; ++k) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) sum += vals[j] * std::cos(std::numbers::pi * k * (n - 1 - j + 0.5) / n);
      s.c_[k] = (k == 0 ? 1.0 : 2.0) * sum / n;
    }
    return s;
  }

  double operator()(double x) const {
    const double t = (2.0 * x - a_ - b_) / (b_ - a_);
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = c_.size(); k-- > 1;) {
      const double b0 = 2.0 * t * b1 - b2 + c_[k];
      b2 = b1;
      b1 = b0;
    }
    return t * b1 - b2 + c_[0];
  }

  /// Antiderivative vanishing at a.
  ChebyshevSeries antiderivative() const {
    const std::size_t n = c_.size();
    ChebyshevSeries s;
    s.a_ = a_;
    s.b_ = b_;
    s.c_.assign(n + 1, 0.0);
    const double scale = 0.5 * (b_ - a_);
    auto coef = [&](std::size_t k) { return k < n ? c_[k] : 0.0; };
    for (std::size_t k = 1; k <= n; ++k) {
      const double prev = k == 1 ? 2.0 * coef(0) : coef(k - 1);
      s.c_[k] = scale * (prev - coef(k + 1)) / (2.0 * k);
    }
    double at_a = 0.0;
    for (std::size_t k = 1; k <= n; ++k) at_a += (k % 2 == 0 ? 1.0 : -1.0) * s.c_[k];
    s.c_[0] = -at_a;
    return s;
  }

  double integral() const { return antiderivative()(b_); }

  std::span<const double> coefficients() const { return c_; }
  double lower() const { return a_; }
  double upper() const { return b_; }

 private:
  double a_ = -1.0, b_ = 1.0;
  std::vector<double> c_;
};

/// Cubic spline with prescribed end slopes.
class ClampedSpline {
 public:
  ClampedSpline() = default;
  ClampedSpline(std::vector<double> x, std::vector<double> y, double slope_start, double slope_end)
      : x_(std::move(x)), y_(std::move(y)), m_(x_.size()) {
    const std::size_t n = x_.size();
    if (n < 3 || y_.size() != n) fail(ErrorKind::InvalidParameter, "spline needs at least 3 points");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) fail(ErrorKind::InvalidParameter, "spline abscissae must increase strictly");
    // Tridiagonal system for second derivatives m_i.
    std::vector<double> sub(n), diag(n), sup(n), rhs(n);
    const double h0 = x_[1] - x_[0], hn = x_[n - 1] - x_[n - 2];
    diag[0] = h0 / 3.0;
    sup[0] = h0 / 6.0;
    rhs[0] = (y_[1] - y_[0]) / h0 - slope_start;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
      sub[i] = hl / 6.0;
      diag[i] = (hl + hr) / 3.0;
      sup[i] = hr / 6.0;
      rhs[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
    }
    sub[n - 1] = hn / 6.0;
    diag[n - 1] = hn / 3.0;
    rhs[n - 1] = slope_end - (y_[n - 1] - y_[n - 2]) / hn;
    for (std::size_t i = 1; i < n; ++i) {
      const double w = sub[i] / diag[i - 1];
      diag[i] -= w * sup[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m_[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / diag[i];
  }

  double value(double x) const { return eval(x, 0); }
  double derivative(double x) const { return eval(x, 1); }
  double second_derivative(double x) const { return eval(x, 2); }
  double lower() const { return x_.front(); }
  double upper() const { return x_.back(); }

 private:
  double eval(double x, int order) const {
    const std::size_t n = x_.size();
    std::size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
    i = std::clamp<std::size_t>(i, 1, n - 1);
    const double h = x_[i] - x_[i - 1];
    const double A = (x_[i] - x) / h, B = (x - x_[i - 1]) / h;
    switch (order) {
      case 0:
        return A * y_[i - 1] + B * y_[i] + ((A * A * A - A) * m_[i - 1] + (B * B * B - B) * m_[i]) * h * h / 6.0;
      case 1:
        return (y_[i] - y_[i - 1]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[i - 1] +
               (3.0 * B * B - 1.0) / 6.0 * h * m_[i];
      default:
        return A * m_[i - 1] + B * m_[i];
    }
  }

  std::vector<double> x_, y_, m_;
};

/// Cubic Lagrange interpolation on a uniform grid using the four nearest points.
inline double cubic_uniform(std::span<const double> values, double start, double step, double x) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(values.size());
  if (n < 4) fail(ErrorKind::InvalidParameter, "cubic interpolation needs 4 points");
  const double s = (x - start) / step;
  std::ptrdiff_t i0 = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
  i0 = std::clamp<std::ptrdiff_t>(i0, 0, n - 4);
  const double t = s - static_cast<double>(i0);  // position relative to node i0, nominally in [1, 2]
  const double l0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
  const double l1 = t * (t - 2) * (t - 3) / 2.0;
  const double l2 = -t * (t - 1) * (t - 3) / 2.0;
  const double l3 = t * (t - 1) * (t - 2) / 6.0;
  return l0 * values[i0] + l1 * values[i0 + 1] + l2 * values[i0 + 2] + l3 * values[i0 + 3];
}

}  // namespace revtone::interp
