#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "revtone/error.hpp"
#include "revtone/interp.hpp"
#include "revtone/quadrature.hpp"
#include "revtone/roots.hpp"

namespace revtone {

using RealFn = std::function<double(double)>;

/// Meridian profile of a sphere-type surface of revolution with metric
/// dr^2 + a(r)^2 dtheta^2, r in [0, length].  Immutable once built.
struct SurfaceProfile {
  RealFn a;
  RealFn da;
  RealFn d2a;
  double length = 0.0;  // pole-to-pole meridian distance
  double r0 = 0.0;      // equator, the unique maximum of a
  double a_r0 = 0.0;
  std::string name;

  double equator_length() const { return 2.0 * std::numbers::pi * a_r0; }
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  std::string failures() const {
    std::string out;
    for (const auto& c : checks) {
      if (c.passed) continue;
      if (!out.empty()) out += ", ";
      out += c.name;
    }
    return out;
  }
};

namespace detail {

constexpr int kValidationSamples = 20000;

// Locate the maximum of a: argmax over a sample grid, then bisection on the
// bracketing sign change of a'.
inline double locate_equator(const RealFn& a, const RealFn& da, double length) {
  const int n = 4096;
  int best = 1;
  double best_val = -1e300;
  for (int i = 1; i < n; ++i) {
    const double v = a(length * i / n);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = length * (best - 1) / n, hi = length * (best + 1) / n;
  if (da(lo) <= 0.0 || da(hi) >= 0.0) return length * best / n;
  return roots::bisect(da, lo, hi, 1e-13 * length);
}

}  // namespace detail

/// Checks every profile invariant and records the measured residual of each.
inline ValidationReport validate_profile(const SurfaceProfile& p) {
  ValidationReport rep;
  const double L = p.length;
  auto add = [&](std::string name, bool ok, double residual, std::string detail = {}) {
    rep.checks.push_back({std::move(name), ok, residual, std::move(detail)});
  };
  if (!(L > 0.0) || !std::isfinite(L)) {
    add("positive_length", false, L);
    return rep;
  }
  const double a_start = p.a(0.0), a_end = p.a(L);
  add("pole_zero_start", std::abs(a_start) <= 1e-12 * L, std::abs(a_start));
  add("pole_zero_end", std::abs(a_end) <= 1e-12 * L, std::abs(a_end));
  const double s0 = p.da(0.0), s1 = p.da(L);
  add("pole_slope_start", std::abs(s0 - 1.0) <= 1e-10, std::abs(s0 - 1.0), "a'(0) = +1");
  add("pole_slope_end", std::abs(s1 + 1.0) <= 1e-10, std::abs(s1 + 1.0), "a'(L) = -1");

  const int n = detail::kValidationSamples;
  double min_interior = 1e300, max_excess = -1e300;
  int sign_changes = 0;
  int prev_sign = 0;
  for (int i = 1; i < n; ++i) {
    const double r = L * i / n;
    const double v = p.a(r);
    min_interior = std::min(min_interior, v);
    if (std::abs(r - p.r0) > 1e-9 * L) max_excess = std::max(max_excess, v - p.a_r0);
    const double d = p.da(r);
    const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (s != 0) {
      if (prev_sign != 0 && s != prev_sign) ++sign_changes;
      prev_sign = s;
    }
  }
  add("positive_interior", min_interior > 0.0, min_interior);
  const double slope_r0 = p.da(p.r0);
  add("equator_critical", std::abs(slope_r0) <= 1e-10, std::abs(slope_r0), "a'(r0) = 0");
  const double curv = p.d2a(p.r0);
  add("equator_nondegenerate", curv < 0.0, curv, "a''(r0) < 0");
  add("single_critical_point", sign_changes == 1, sign_changes, "a' changes sign exactly once");
  add("equator_maximal", max_excess <= 1e-14 * std::max(1.0, p.a_r0), max_excess, "a(r0) >= a(r)");
  return rep;
}

inline SurfaceProfile finish_profile(SurfaceProfile p, bool check = true) {
  p.r0 = detail::locate_equator(p.a, p.da, p.length);
  p.a_r0 = p.a(p.r0);
  if (!check) return p;
  const auto rep = validate_profile(p);
  if (!rep.passed()) fail(ErrorKind::RejectedProfile, "profile '" + p.name + "' violates: " + rep.failures());
  return p;
}

inline SurfaceProfile make_round_sphere() {
  SurfaceProfile p;
  p.a = [](double r) { return std::sin(r); };
  p.da = [](double r) { return std::cos(r); };
  p.d2a = [](double r) { return -std::sin(r); };
  p.length = std::numbers::pi;
  p.r0 = std::numbers::pi / 2;
  p.a_r0 = 1.0;
  p.name = "round_sphere";
  return p;
}

/// Profile from user callables; r0 is located numerically and the result validated.
inline SurfaceProfile make_custom(RealFn a, RealFn da, RealFn d2a, double length, std::string name = "custom") {
  if (!(length > 0.0)) fail(ErrorKind::InvalidParameter, "profile length must be positive");
  SurfaceProfile p;
  p.a = std::move(a);
  p.da = std::move(da);
  p.d2a = std::move(d2a);
  p.length = length;
  p.name = std::move(name);
  return finish_profile(std::move(p));
}

/// Ellipsoid of revolution x^2 + y^2 + z^2/aspect^2 = 1, meridian
/// (sin t, aspect cos t), reparametrized by arclength s(t).  The inverse map
/// t(s) is tabulated on Chebyshev-Lobatto nodes and evaluated barycentrically.
inline SurfaceProfile make_ellipsoid(double aspect, int nodes = 256) {
  if (!(aspect > 0.0) || !std::isfinite(aspect)) fail(ErrorKind::InvalidParameter, "ellipsoid aspect must be > 0");
  const double q2 = aspect * aspect;
  auto speed = [q2](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return std::sqrt(c * c + q2 * s * s);
  };
  // Arclength from 0 by composite Gauss-Legendre.
  const quad::GaussLegendre gl(20);
  const int panels = 64;
  std::vector<double> panel_start(panels + 1, 0.0);
  const double dt = std::numbers::pi / panels;
  for (int k = 0; k < panels; ++k) panel_start[k + 1] = panel_start[k] + gl.integrate(speed, k * dt, (k + 1) * dt);
  auto arclength = [&](double t) {
    const int k = std::clamp(static_cast<int>(t / dt), 0, panels - 1);
    return panel_start[k] + gl.integrate(speed, k * dt, t);
  };
  const double L = panel_start[panels];

  const auto s_nodes = interp::lobatto_nodes(0.0, L, nodes);
  std::vector<double> t_nodes(s_nodes.size());
  for (std::size_t j = 0; j < s_nodes.size(); ++j) {
    const double target = s_nodes[j];
    if (j == 0) {
      t_nodes[j] = 0.0;
      continue;
    }
    if (j + 1 == s_nodes.size()) {
      t_nodes[j] = std::numbers::pi;
      continue;
    }
    auto fdf = [&](double t) { return std::pair{arclength(t) - target, speed(t)}; };
    t_nodes[j] = roots::newton_increasing(fdf, 0.0, std::numbers::pi, target / L * std::numbers::pi, 1e-15 * L);
  }
  auto t_of_s = std::make_shared<const interp::Barycentric>(s_nodes, std::move(t_nodes));

  SurfaceProfile p;
  p.length = L;
  p.a = [t_of_s](double r) { return std::sin((*t_of_s)(r)); };
  p.da = [t_of_s, speed](double r) {
    const double t = (*t_of_s)(r);
    return std::cos(t) / speed(t);
  };
  p.d2a = [t_of_s, speed, q2](double r) {
    const double t = (*t_of_s)(r);
    const double c = std::cos(t), s = std::sin(t);
    const double sp = speed(t);
    const double spp = (q2 - 1.0) * s * c / sp;
    return -s / (sp * sp) - c * spp / (sp * sp * sp);
  };
  std::ostringstream name;
  name << "ellipsoid(aspect=" << aspect << ")";
  p.name = name.str();
  return finish_profile(std::move(p));
}

/// Profile from a two-column table (r, a(r)) with r strictly increasing from 0
/// to L.  Interpolated by a cubic spline clamped to the pole slopes +1 and -1.
/// With `check` off the geometric invariants are left to the caller.
inline SurfaceProfile make_from_table(std::vector<double> r, std::vector<double> a, std::string name = "custom_table",
                                      bool check = true) {
  if (r.size() != a.size() || r.size() < 4) fail(ErrorKind::InvalidParameter, "profile table needs at least 4 rows");
  if (r.front() != 0.0) fail(ErrorKind::InvalidParameter, "profile table row 1: first r must be 0");
  for (std::size_t i = 1; i < r.size(); ++i)
    if (!(r[i] > r[i - 1]))
      fail(ErrorKind::InvalidParameter, "profile table row " + std::to_string(i + 1) + ": r is not strictly increasing");
  const double L = r.back();
  auto spline = std::make_shared<const interp::ClampedSpline>(std::move(r), std::move(a), 1.0, -1.0);
  SurfaceProfile p;
  p.length = L;
  p.a = [spline](double x) { return spline->value(x); };
  p.da = [spline](double x) { return spline->derivative(x); };
  p.d2a = [spline](double x) { return spline->second_derivative(x); };
  p.name = std::move(name);
  return finish_profile(std::move(p), check);
}

inline SurfaceProfile load_profile_table(const std::string& path, bool check = true) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidParameter, "cannot open profile table '" + path + "'");
  std::vector<double> r, a;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
    ++row;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream fields(line);
    double x = 0.0, y = 0.0;
    if (!(fields >> x >> y))
      fail(ErrorKind::InvalidParameter, "profile table row " + std::to_string(row) + ": expected two numbers");
    if (!r.empty() && !(x > r.back()))
      fail(ErrorKind::InvalidParameter, "profile table row " + std::to_string(row) + ": r is not strictly increasing");
    r.push_back(x);
    a.push_back(y);
  }
  return make_from_table(std::move(r), std::move(a), path, check);
}

}  // namespace revtone
