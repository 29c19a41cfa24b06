#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "revtone/actions.hpp"
#include "revtone/error.hpp"
#include "revtone/interp.hpp"
#include "revtone/parallel.hpp"
#include "revtone/surface.hpp"
#include "revtone/tridiag.hpp"

namespace revtone {

/// Uniform radial grid on [delta, L - delta], delta = L / (10 N), with the
/// control-volume weights int a dr used as the discrete L2(a dr) measure.
struct RadialGrid {
  double start = 0.0;
  double step = 0.0;
  std::vector<double> r;
  std::vector<double> weight;
};

/// One separated eigenfunction phi = e^{i m theta} u(r) / sqrt(2 pi).
struct RadialMode {
  int m = 0;
  int n = 0;    // interior sign changes of u
  int ell = 0;  // |m| + n
  double lambda_sq = 0.0;
  double lambda = 0.0;
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> u;  // sum_i weight_i u_i^2 = 1
  double u_at_r0 = 0.0;
};

struct SpectralOptions {
  int grid_size = 4000;
  /// Combine the grid_size solve with a half-resolution solve to cancel the
  /// leading h^2 error of eigenvalues and equator values.
  bool richardson = true;
};

namespace detail {

struct RadialProblem {
  std::shared_ptr<RadialGrid> grid;
  tridiag::SymTridiagonal t;
  std::size_t first = 0;  // grid index of the first unknown
};

// -(a u')' + (m^2 / a) u = lambda^2 a u in flux form, symmetrized by the
// diagonal weight.  m != 0: Dirichlet at both ends; m = 0: zero flux.
inline RadialProblem build_radial_problem(const SurfaceProfile& p, int m, int n) {
  const double L = p.length;
  const double delta = L / (10.0 * n);
  const double h = (L - 2.0 * delta) / (n - 1);
  auto grid = std::make_shared<RadialGrid>();
  grid->start = delta;
  grid->step = h;
  grid->r.resize(n);
  grid->weight.resize(n);
  std::vector<double> a(n), a_half(n - 1);
  for (int i = 0; i < n; ++i) {
    grid->r[i] = delta + i * h;
    a[i] = p.a(grid->r[i]);
    grid->weight[i] = h * a[i];
  }
  for (int i = 0; i + 1 < n; ++i) a_half[i] = p.a(grid->r[i] + 0.5 * h);
  const double m2 = static_cast<double>(m) * m;

  RadialProblem prob;
  prob.grid = grid;
  std::vector<double> diag, off;
  if (m == 0) {
    grid->weight[0] = 0.5 * h * p.a(delta + 0.25 * h);
    grid->weight[n - 1] = 0.5 * h * p.a(L - delta - 0.25 * h);
    prob.first = 0;
    diag.resize(n);
    off.resize(n - 1);
    diag[0] = a_half[0] / h;
    diag[n - 1] = a_half[n - 2] / h;
    for (int i = 1; i + 1 < n; ++i) diag[i] = (a_half[i - 1] + a_half[i]) / h;
    for (int i = 0; i + 1 < n; ++i) off[i] = -a_half[i] / h;
  } else {
    prob.first = 1;
    diag.resize(n - 2);
    off.resize(n - 3);
    for (int i = 1; i + 1 < n; ++i) diag[i - 1] = (a_half[i - 1] + a_half[i]) / h + h * m2 / a[i];
    for (int i = 1; i + 2 < n; ++i) off[i - 1] = -a_half[i] / h;
  }
  prob.t.d.resize(diag.size());
  prob.t.e.resize(off.size());
  for (std::size_t i = 0; i < diag.size(); ++i) prob.t.d[i] = diag[i] / grid->weight[prob.first + i];
  for (std::size_t i = 0; i < off.size(); ++i)
    prob.t.e[i] = off[i] / std::sqrt(grid->weight[prob.first + i] * grid->weight[prob.first + i + 1]);
  return prob;
}

inline int count_sign_changes(const std::vector<double>& u) {
  double peak = 0.0;
  for (double v : u) peak = std::max(peak, std::abs(v));
  const double floor = 1e-8 * peak;
  int changes = 0, prev = 0;
  for (double v : u) {
    if (std::abs(v) <= floor) continue;
    const int s = v > 0 ? 1 : -1;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return changes;
}

struct DiscreteMode {
  double lambda_sq = 0.0;
  std::vector<double> u;
  double u_at_r0 = 0.0;
};

inline DiscreteMode solve_index(const RadialProblem& prob, std::size_t k, double r0) {
  DiscreteMode out;
  out.lambda_sq = std::max(0.0, tridiag::eigenvalue(prob.t, k));
  const std::vector<double> v = tridiag::eigenvector(prob.t, out.lambda_sq);
  const RadialGrid& g = *prob.grid;
  out.u.assign(g.r.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) out.u[prob.first + i] = v[i] / std::sqrt(g.weight[prob.first + i]);
  // Sign convention: the first value above 1e-3 of the peak is positive.
  double peak = 0.0;
  for (double x : out.u) peak = std::max(peak, std::abs(x));
  for (double x : out.u) {
    if (std::abs(x) > 1e-3 * peak) {
      if (x < 0)
        for (double& y : out.u) y = -y;
      break;
    }
  }
  out.u_at_r0 = interp::cubic_uniform(out.u, g.start, g.step, r0);
  return out;
}

inline void check_grid(int grid_size) {
  if (grid_size < 500) fail(ErrorKind::InvalidParameter, "grid_size must be >= 500");
}

inline void check_resolution(double lambda, double step, int m, int n) {
  const double per_wavelength = 2.0 * std::numbers::pi / (lambda * step);
  if (lambda > 0.0 && per_wavelength < 10.0)
    fail(ErrorKind::ResolutionError, "grid too coarse for (m=" + std::to_string(m) + ", n=" + std::to_string(n) +
                                         "): " + std::to_string(per_wavelength) + " points per wavelength");
}

inline RadialMode assemble(const SurfaceProfile& p, const RadialProblem& fine, DiscreteMode f, int m, int n,
                           const SpectralOptions& opt) {
  const int changes = count_sign_changes(f.u);
  if (changes != n)
    fail(ErrorKind::LabelingFailure, "mode (m=" + std::to_string(m) + ", index " + std::to_string(n) + ") has " +
                                         std::to_string(changes) + " sign changes; refine the grid");
  check_resolution(std::sqrt(f.lambda_sq), fine.grid->step, m, n);
  RadialMode mode;
  mode.m = m;
  mode.n = n;
  mode.ell = std::abs(m) + n;
  mode.lambda_sq = f.lambda_sq;
  mode.u_at_r0 = f.u_at_r0;
  if (opt.richardson) {
    const RadialProblem coarse = build_radial_problem(p, std::abs(m), opt.grid_size / 2);
    const DiscreteMode c = solve_index(coarse, static_cast<std::size_t>(n), p.r0);
    const double hf2 = fine.grid->step * fine.grid->step;
    const double hc2 = coarse.grid->step * coarse.grid->step;
    const double w = hf2 / (hc2 - hf2);
    mode.lambda_sq = std::max(0.0, f.lambda_sq + (f.lambda_sq - c.lambda_sq) * w);
    mode.u_at_r0 = f.u_at_r0 + (f.u_at_r0 - c.u_at_r0) * w;
  }
  mode.lambda = std::sqrt(mode.lambda_sq);
  mode.grid = fine.grid;
  mode.u = std::move(f.u);
  return mode;
}

}  // namespace detail

/// The mode with exactly n interior nodes for angular number m.
inline RadialMode radial_mode(const SurfaceProfile& p, int m, int n, const SpectralOptions& opt = {}) {
  detail::check_grid(opt.grid_size);
  if (n < 0) fail(ErrorKind::InvalidParameter, "node count must be >= 0");
  const detail::RadialProblem fine = detail::build_radial_problem(p, std::abs(m), opt.grid_size);
  if (static_cast<std::size_t>(n) >= fine.t.size()) fail(ErrorKind::ResolutionError, "node count exceeds grid");
  auto f = detail::solve_index(fine, static_cast<std::size_t>(n), p.r0);
  return detail::assemble(p, fine, std::move(f), m, n, opt);
}

/// The n_max + 1 lowest modes for angular number m, ascending.
inline std::vector<RadialMode> radial_modes(const SurfaceProfile& p, int m, int n_max, const SpectralOptions& opt = {}) {
  detail::check_grid(opt.grid_size);
  if (n_max < 0) fail(ErrorKind::InvalidParameter, "n_max must be >= 0");
  const detail::RadialProblem fine = detail::build_radial_problem(p, std::abs(m), opt.grid_size);
  std::vector<RadialMode> modes;
  modes.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    auto f = detail::solve_index(fine, static_cast<std::size_t>(n), p.r0);
    modes.push_back(detail::assemble(p, fine, std::move(f), m, n, opt));
  }
  return modes;
}

/// ||phi||^2 on the equator: a(r0) |u(r0)|^2 (the e^{i m theta}/sqrt(2 pi) factor integrates to 1 against a(r0) dtheta).
inline double restricted_norm(const RadialMode& mode, const SurfaceProfile& p) {
  return p.a_r0 * mode.u_at_r0 * mode.u_at_r0;
}

/// <b(r) phi, phi> by the solver-grid quadrature.
template <class B>
double matrix_element_radial(const RadialMode& mode, B&& b) {
  const RadialGrid& g = *mode.grid;
  double sum = 0.0;
  for (std::size_t i = 0; i < mode.u.size(); ++i) sum += g.weight[i] * b(g.r[i]) * mode.u[i] * mode.u[i];
  return sum;
}

/// <chi(D_theta (-Delta)^{-1/2}) phi, phi> = chi(m / lambda).
template <class Chi>
double matrix_element_angular(const RadialMode& mode, Chi&& chi) {
  if (!(mode.lambda > 0.0)) fail(ErrorKind::InvalidParameter, "angular matrix element needs lambda > 0");
  return chi(mode.m / mode.lambda);
}

/// lambda - K(m, ell + 1/2).
inline double ebk_residual(const RadialMode& mode, const ActionEvaluator& ev) {
  return mode.lambda - ev.energy(mode.m, mode.ell + 0.5);
}

/// All 2 ell + 1 joint eigenfunctions of one I2 level, ordered m = -ell .. ell.
struct JointSlice {
  int ell = 0;
  std::vector<RadialMode> modes;
  std::vector<double> restricted_norms;
  std::vector<double> ebk_residuals;

  const RadialMode& mode(int m) const { return modes.at(static_cast<std::size_t>(m + ell)); }
  double norm(int m) const { return restricted_norms.at(static_cast<std::size_t>(m + ell)); }
};

inline JointSlice joint_slice(const SurfaceProfile& p, const ActionEvaluator& ev, int ell, const SpectralOptions& opt = {}) {
  if (ell < 1) fail(ErrorKind::InvalidParameter, "ell must be >= 1");
  std::vector<RadialMode> positive(static_cast<std::size_t>(ell) + 1);
  parallel_for(positive.size(), [&](std::size_t k) {
    positive[k] = radial_mode(p, static_cast<int>(k), ell - static_cast<int>(k), opt);
  });
  JointSlice s;
  s.ell = ell;
  s.modes.reserve(2 * ell + 1);
  for (int m = -ell; m <= ell; ++m) {
    RadialMode mode = positive[static_cast<std::size_t>(std::abs(m))];
    mode.m = m;
    s.modes.push_back(std::move(mode));
  }
  for (const auto& mode : s.modes) {
    s.restricted_norms.push_back(restricted_norm(mode, p));
    s.ebk_residuals.push_back(ebk_residual(mode, ev));
  }
  return s;
}

/// Closed-form equator norm of the unit spherical harmonic Y_ell^m on the
/// round sphere: 2 pi |N P_ell^m(0)|^2 = (2 ell + 1)/2 q((ell+m)/2) q((ell-m)/2),
/// q(k) = (2k-1)!!/(2k)!!, and zero when ell + m is odd.
inline double sphere_restricted_norm(int ell, int m) {
  const int am = std::abs(m);
  if (am > ell || (ell + am) % 2 != 0) return 0.0;
  auto q = [](int k) {
    long double v = 1.0L;
    for (int j = 1; j <= k; ++j) v *= static_cast<long double>(2 * j - 1) / (2 * j);
    return v;
  };
  return static_cast<double>((2.0L * ell + 1.0L) / 2.0L * q((ell + am) / 2) * q((ell - am) / 2));
}

}  // namespace revtone
