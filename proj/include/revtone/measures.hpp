#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "revtone/actions.hpp"
#include "revtone/error.hpp"
#include "revtone/parallel.hpp"
#include "revtone/quadrature.hpp"
#include "revtone/spectral.hpp"

namespace revtone {

struct Atom {
  double c = 0.0;
  double w = 0.0;
};

/// Finitely many atoms on [-1, 1], sorted by position.
///
/// Normalized to unit mass unless `is_signed` is set; a signed measure keeps
/// its raw weights and only supports moment comparisons.
struct EmpiricalMeasure {
  std::vector<Atom> atoms;
  double total_mass_raw = 0.0;
  bool is_signed = false;

  double integrate(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (const Atom& a : atoms) s += a.w * f(a.c);
    return s;
  }
};

struct LimitMeasure {
  std::function<double(double)> density;
  std::function<double(double)> cdf;
  double mass_constant = 0.0;
};

/// Atoms (m / ell, raw_m) for m = -ell .. ell.
inline EmpiricalMeasure empirical_from_weights(int ell, const std::vector<double>& raw, bool allow_signed) {
  if (raw.size() != static_cast<std::size_t>(2 * ell + 1)) fail(ErrorKind::InvalidParameter, "need 2 ell + 1 weights");
  EmpiricalMeasure mu;
  mu.atoms.reserve(raw.size());
  double total = 0.0;
  for (double w : raw) total += w;
  mu.total_mass_raw = total;
  bool mixed = total == 0.0;
  for (double w : raw)
    if (w * total < 0.0) mixed = true;
  if (mixed && !allow_signed) fail(ErrorKind::DegenerateMeasure, "weights do not define a probability measure");
  mu.is_signed = mixed;
  for (int m = -ell; m <= ell; ++m) {
    const double w = raw[static_cast<std::size_t>(m + ell)];
    mu.atoms.push_back({static_cast<double>(m) / ell, mixed ? w : w / total});
  }
  return mu;
}

/// mu_ell: equator L2 norms of one slice.
inline EmpiricalMeasure empirical_mu(const JointSlice& slice) {
  return empirical_from_weights(slice.ell, slice.restricted_norms, false);
}

/// mu_ell on the round sphere from the closed-form Legendre norms, with no eigensolve.
inline EmpiricalMeasure empirical_mu_sphere(int ell) {
  std::vector<double> raw;
  for (int m = -ell; m <= ell; ++m) raw.push_back(sphere_restricted_norm(ell, m));
  return empirical_from_weights(ell, raw, false);
}

/// nu_ell(B): diagonal matrix elements <B phi, phi> of one slice.
inline EmpiricalMeasure empirical_nu(const JointSlice& slice, const SymbolFn& sym) {
  std::vector<double> raw;
  raw.reserve(slice.modes.size());
  for (const auto& mode : slice.modes) {
    switch (sym.kind) {
      case SymbolFn::Kind::RadialMult: raw.push_back(matrix_element_radial(mode, sym.radial)); break;
      case SymbolFn::Kind::AngularRatio: raw.push_back(matrix_element_angular(mode, sym.ratio)); break;
      case SymbolFn::Kind::PhaseSpace:
        fail(ErrorKind::UnsupportedQuantization, "phase_space symbols have no matrix elements here");
    }
  }
  return empirical_from_weights(slice.ell, raw, true);
}

inline LimitMeasure limit_measure_mu(const ActionEvaluator& ev) {
  const double M = ev.normalization();
  LimitMeasure lim;
  lim.mass_constant = M;
  lim.density = [ev, M](double c) { return ev.limit_density_unnorm(c) / M; };
  lim.cdf = [ev](double c) { return ev.limit_cdf(c); };
  return lim;
}

inline LimitMeasure limit_measure_nu(const ActionEvaluator& ev, const SymbolFn& sym) {
  auto table = std::make_shared<const DensityTable>(ev.torus_average_table(sym));
  const double omega = table->mass();
  const DensityTable magnitude([&](double c) { return std::abs(ev.torus_average(sym, c)); }, ev.options().cdf_nodes);
  if (!(std::abs(omega) > 1e-12 * magnitude.mass())) fail(ErrorKind::SignedMeasure, "Liouville state vanishes");
  LimitMeasure lim;
  lim.mass_constant = omega;
  lim.density = [ev, sym, omega](double c) { return ev.torus_average(sym, c) / omega; };
  lim.cdf = [table](double c) { return table->cdf(c); };
  return lim;
}

/// Sup of |F_emp - F_lim| over both one-sided limits at every atom.
inline double ks_distance(const EmpiricalMeasure& emp, const LimitMeasure& lim) {
  if (emp.is_signed) fail(ErrorKind::SignedMeasure, "KS distance needs a probability measure");
  double below = 0.0, worst = 0.0;
  for (const Atom& a : emp.atoms) {
    const double g = lim.cdf(a.c);
    const double above = below + a.w;
    worst = std::max({worst, std::abs(below - g), std::abs(above - g)});
    below = above;
  }
  return worst;
}

/// int_{-1}^{1} |F_emp - F_lim| dc, integrated in t = asin c between atoms,
/// split where the limit CDF crosses the empirical step.
inline double wasserstein1(const EmpiricalMeasure& emp, const LimitMeasure& lim) {
  if (emp.is_signed) fail(ErrorKind::SignedMeasure, "W1 distance needs a probability measure");
  static const quad::GaussLegendre gl(24);
  constexpr double half_pi = std::numbers::pi / 2;
  auto G = [&](double t) { return lim.cdf(std::sin(t)); };
  auto piece = [&](double level, double ta, double tb) {
    if (tb <= ta) return 0.0;
    return gl.integrate([&](double t) { return std::abs(level - G(t)) * std::cos(t); }, ta, tb);
  };
  double total = 0.0, level = 0.0, ta = -half_pi;
  auto segment = [&](double tb) {
    const double ga = G(ta), gb = G(tb);
    if ((ga - level) * (gb - level) < 0.0) {
      double lo = ta, hi = tb;
      for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((G(mid) - level) * (ga - level) > 0.0) lo = mid; else hi = mid;
      }
      const double tc = 0.5 * (lo + hi);
      total += piece(level, ta, tc) + piece(level, tc, tb);
    } else {
      total += piece(level, ta, tb);
    }
  };
  for (const Atom& a : emp.atoms) {
    const double tb = std::asin(std::clamp(a.c, -1.0, 1.0));
    segment(tb);
    level += a.w;
    ta = tb;
  }
  segment(half_pi);
  return total;
}

struct PowerFit {
  double exponent = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// Least squares of log y against log x.
inline PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  PowerFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0 && y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  fit.points = static_cast<int>(lx.size());
  if (lx.size() < 2) return fit;
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.exponent = sxx > 0 ? sxy / sxx : 0.0;
  fit.r2 = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

struct ConvergenceRow {
  int ell = 0;
  double M_ell = 0.0;
  double M_ell_over_ell = 0.0;
  double ks_mu = 0.0;
  double w1_mu = 0.0;
  std::optional<double> ks_nu;
  std::optional<double> w1_nu;
  bool nu_signed = false;
  std::optional<std::string> error;
};

struct ConvergenceReport {
  std::string profile;
  std::vector<int> ells;
  std::vector<ConvergenceRow> rows;
  PowerFit fit;       // W1(mu_ell) against ell, all successful rows
  PowerFit fit_even;  // even ell only
};

struct SweepOptions {
  SpectralOptions spectral;
  /// Round sphere only: take restricted norms from the Legendre closed form
  /// and eigenvalues from ell(ell+1) instead of the radial solver.
  bool sphere_closed_form = false;
};

inline ConvergenceReport convergence_sweep(const SurfaceProfile& p, const ActionEvaluator& ev, const std::vector<int>& ells,
                                           const std::optional<SymbolFn>& sym, const SweepOptions& opt = {}) {
  for (std::size_t i = 1; i < ells.size(); ++i)
    if (ells[i] <= ells[i - 1]) fail(ErrorKind::InvalidParameter, "ells must be strictly ascending");
  if (sym && sym->kind == SymbolFn::Kind::PhaseSpace)
    fail(ErrorKind::UnsupportedQuantization, "phase_space symbols have no matrix elements here");
  if (opt.sphere_closed_form && sym && sym->kind == SymbolFn::Kind::RadialMult)
    fail(ErrorKind::InvalidParameter, "closed-form sweep supports angular symbols only");

  const LimitMeasure lim_mu = limit_measure_mu(ev);
  std::optional<LimitMeasure> lim_nu;
  if (sym) lim_nu = limit_measure_nu(ev, *sym);

  ConvergenceReport rep;
  rep.profile = p.name;
  rep.ells = ells;
  rep.rows.resize(ells.size());
  parallel_for(ells.size(), [&](std::size_t i) {
    ConvergenceRow& row = rep.rows[i];
    const int ell = ells[i];
    row.ell = ell;
    try {
      EmpiricalMeasure mu;
      std::optional<EmpiricalMeasure> nu;
      if (opt.sphere_closed_form) {
        mu = empirical_mu_sphere(ell);
        if (sym) {
          std::vector<double> raw;
          const double lambda = std::sqrt(static_cast<double>(ell) * (ell + 1));
          for (int m = -ell; m <= ell; ++m) raw.push_back(sym->ratio(m / lambda));
          nu = empirical_from_weights(ell, raw, true);
        }
      } else {
        const JointSlice slice = joint_slice(p, ev, ell, opt.spectral);
        mu = empirical_mu(slice);
        if (sym) nu = empirical_nu(slice, *sym);
      }
      row.M_ell = mu.total_mass_raw;
      row.M_ell_over_ell = mu.total_mass_raw / ell;
      row.ks_mu = ks_distance(mu, lim_mu);
      row.w1_mu = wasserstein1(mu, lim_mu);
      if (nu) {
        row.nu_signed = nu->is_signed;
        if (!nu->is_signed) {
          row.ks_nu = ks_distance(*nu, *lim_nu);
          row.w1_nu = wasserstein1(*nu, *lim_nu);
        }
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
  });

  std::vector<double> x, y, xe, ye;
  for (const auto& row : rep.rows) {
    if (row.error) continue;
    x.push_back(row.ell);
    y.push_back(row.w1_mu);
    if (row.ell % 2 == 0) {
      xe.push_back(row.ell);
      ye.push_back(row.w1_mu);
    }
  }
  rep.fit = fit_power_law(x, y);
  rep.fit_even = fit_power_law(xe, ye);
  return rep;
}

}  // namespace revtone
