#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "revtone/error.hpp"

namespace revtone::quad {

/// Fixed-node double-exponential (tanh-sinh) rule on [-1, 1].
///
/// The substitution x = tanh(pi/2 sinh t) maps the interval onto the real
/// line and makes integrand endpoint singularities of algebraic type decay
/// doubly exponentially in t, so a plain trapezoid rule in t converges
/// geometrically.  Each node stores its distances to both endpoints computed
/// without cancellation; integrands that lose precision near the ends can use
/// them instead of `x`.
class TanhSinhRule {
 public:
  struct Node {
    double x;       // abscissa in (-1, 1)
    double left;    // 1 + x
    double right;   // 1 - x
    double weight;
  };

  explicit TanhSinhRule(int nodes = 256, double t_max = 4.0) {
    if (nodes < 8) fail(ErrorKind::InvalidParameter, "tanh-sinh rule needs at least 8 nodes");
    const int half = nodes / 2;
    const double h = t_max / half;
    nodes_.reserve(2 * half + 1);
    for (int k = -half; k <= half; ++k) {
      const double t = k * h;
      const double u = std::numbers::pi / 2 * std::sinh(t);
      const double e = std::exp(-2.0 * std::abs(u));
      // 1 - tanh|u| = 2e / (1 + e)
      const double small = 2.0 * e / (1.0 + e);
      const double big = 2.0 - small;
      const double ch = std::cosh(u);
      const double w = h * std::numbers::pi / 2 * std::cosh(t) / (ch * ch);
      Node node{};
      node.x = std::tanh(u);
      node.left = u < 0 ? small : big;
      node.right = u < 0 ? big : small;
      node.weight = w;
      if (node.left <= 0.0 || node.right <= 0.0 || w == 0.0) continue;
      nodes_.push_back(node);
    }
  }

  std::span<const Node> nodes() const { return nodes_; }

  /// Integrate f(r, dl, dr) over [a, b]; dl = r - a and dr = b - r.
  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (const Node& n : nodes_) {
      const double dl = half * n.left;
      const double dr = half * n.right;
      const double r = dl <= dr ? a + dl : b - dr;
      sum += n.weight * f(r, dl, dr);
    }
    return half * sum;
  }

 private:
  std::vector<Node> nodes_;
};

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on the three-term recurrence).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) fail(ErrorKind::InvalidParameter, "gauss_legendre: n must be positive");
  std::vector<double> x(n), w(n);
  // Returns (P_n(z), P_n'(z)).
  auto legendre = [n](double z) {
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (z * p1 - p0) / (z * z - 1.0)};
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(z);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double dp = legendre(z).second;
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {std::move(x), std::move(w)};
}

/// Reusable Gauss-Legendre rule.
class GaussLegendre {
 public:
  explicit GaussLegendre(int n) {
    auto [x, w] = gauss_legendre(n);
    x_ = std::move(x);
    w_ = std::move(w);
  }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) sum += w_[i] * f(mid + half * x_[i]);
    return half * sum;
  }

 private:
  std::vector<double> x_, w_;
};

}  // namespace revtone::quad
