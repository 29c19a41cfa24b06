#include <cmath>
#include <cstdlib>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "revtone/measures.hpp"

using namespace revtone;

namespace {

const SurfaceProfile& sphere() {
  static const SurfaceProfile p = make_round_sphere();
  return p;
}

const ActionEvaluator& sphere_ev() {
  static const ActionEvaluator ev(sphere());
  return ev;
}

const ActionEvaluator& ellipsoid_ev() {
  static const ActionEvaluator ev(make_ellipsoid(1.3));
  return ev;
}

double total_weight(const EmpiricalMeasure& mu) {
  double s = 0.0;
  for (const auto& a : mu.atoms) s += a.w;
  return s;
}

EmpiricalMeasure oracle_mu(int ell) {
  std::vector<double> raw;
  for (int m = -ell; m <= ell; ++m) raw.push_back(oracle::legendre_equator_norm(ell, m));
  return empirical_from_weights(ell, raw, false);
}

LimitMeasure arcsine() {
  LimitMeasure lim;
  lim.density = [](double c) { return 1.0 / (std::numbers::pi * std::sqrt(1 - c * c)); };
  lim.cdf = [](double c) { return 0.5 + std::asin(std::clamp(c, -1.0, 1.0)) / std::numbers::pi; };
  lim.mass_constant = std::numbers::pi;
  return lim;
}

}  // namespace

TEST(EmpiricalMu, SphereEllOne) {
  const auto mu = empirical_mu(joint_slice(sphere(), sphere_ev(), 1));
  ASSERT_EQ(mu.atoms.size(), 3u);
  EXPECT_NEAR(mu.total_mass_raw, 1.5, 1e-8);
  EXPECT_EQ(mu.atoms[0].c, -1.0);
  EXPECT_NEAR(mu.atoms[0].w, 0.5, 1e-9);
  EXPECT_NEAR(mu.atoms[1].w, 0.0, 1e-12);
  EXPECT_NEAR(mu.atoms[2].w, 0.5, 1e-9);
  EXPECT_FALSE(mu.is_signed);
}

TEST(EmpiricalMu, SphereEllTwoAndSymmetry) {
  const auto mu = empirical_mu(joint_slice(sphere(), sphere_ev(), 2));
  EXPECT_NEAR(mu.atoms[2].w, 0.625 / mu.total_mass_raw, 1e-9);
  EXPECT_NEAR(mu.total_mass_raw, 2.5, 1e-8);
  const auto ell = empirical_mu(joint_slice(make_ellipsoid(1.3), ellipsoid_ev(), 12));
  EXPECT_NEAR(total_weight(ell), 1.0, 1e-12);
  for (std::size_t i = 0; i < ell.atoms.size(); ++i) {
    EXPECT_EQ(ell.atoms[i].w, ell.atoms[ell.atoms.size() - 1 - i].w);
    EXPECT_EQ(ell.atoms[i].c, -ell.atoms[ell.atoms.size() - 1 - i].c);
    if (i > 0) {
      EXPECT_LT(ell.atoms[i - 1].c, ell.atoms[i].c);
    }
  }
}

TEST(EmpiricalMu, DegenerateWeights) {
  try {
    empirical_from_weights(1, {0.0, 0.0, 0.0}, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateMeasure);
  }
}

TEST(EmpiricalNu, Examples) {
  const auto slice = joint_slice(sphere(), sphere_ev(), 1);
  const auto uniform = empirical_nu(slice, SymbolFn::identity());
  for (const auto& a : uniform.atoms) EXPECT_NEAR(a.w, 1.0 / 3.0, 1e-8);
  const auto sq = empirical_nu(slice, SymbolFn::angular_ratio([](double s) { return s * s; }));
  EXPECT_NEAR(sq.atoms[0].w, 0.5, 1e-9);
  EXPECT_EQ(sq.atoms[1].w, 0.0);
  EXPECT_NEAR(sq.atoms[2].w, 0.5, 1e-9);
  const auto pos = empirical_nu(joint_slice(sphere(), sphere_ev(), 6),
                                SymbolFn::radial_mult([](double r) { return 1.1 + std::cos(r); }));
  for (const auto& a : pos.atoms) EXPECT_GT(a.w, 0.0);
  EXPECT_FALSE(pos.is_signed);
}

TEST(EmpiricalNu, PhaseSpaceUnsupported) {
  const auto slice = joint_slice(sphere(), sphere_ev(), 1);
  try {
    empirical_nu(slice, SymbolFn::phase_space([](double, double, double, double) { return 1.0; }));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedQuantization);
  }
}

TEST(EmpiricalNu, SignedSymbolFlagged) {
  // chi(s) = s gives weights m / lambda of both signs
  const auto slice = joint_slice(sphere(), sphere_ev(), 4);
  const auto nu = empirical_nu(slice, SymbolFn::angular_ratio([](double s) { return s; }));
  EXPECT_TRUE(nu.is_signed);
  EXPECT_NEAR(nu.total_mass_raw, 0.0, 1e-12);
  try {
    ks_distance(nu, arcsine());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SignedMeasure);
  }
  EXPECT_THROW(wasserstein1(nu, arcsine()), Error);
}

TEST(EmpiricalNu, AllNegativeWeightsNormalize) {
  const auto nu = empirical_from_weights(1, {-1.0, -2.0, -1.0}, true);
  EXPECT_FALSE(nu.is_signed);
  EXPECT_NEAR(nu.atoms[1].w, 0.5, 1e-15);
}

TEST(LimitMeasures, SphereMu) {
  const auto lim = limit_measure_mu(sphere_ev());
  for (double c : {-0.9, 0.0, 0.3, 0.99}) EXPECT_NEAR(lim.density(c) / arcsine().density(c), 1.0, 1e-9);
  EXPECT_NEAR(lim.cdf(0.5), 2.0 / 3.0, 1e-10);
  EXPECT_NEAR(lim.mass_constant, std::numbers::pi, 1e-8);
}

TEST(LimitMeasures, EllipsoidCdfEnds) {
  const auto lim = limit_measure_mu(ellipsoid_ev());
  EXPECT_NEAR(lim.cdf(1.0), 1.0, 1e-8);
  EXPECT_NEAR(lim.cdf(-1.0), 0.0, 1e-8);
  EXPECT_NEAR(lim.cdf(0.0), 0.5, 1e-10);
}

TEST(LimitMeasures, Nu) {
  const auto uniform = limit_measure_nu(ellipsoid_ev(), SymbolFn::identity());
  for (double c : {-0.8, 0.1, 0.7}) EXPECT_NEAR(uniform.density(c), 0.5, 1e-9);
  const auto sq = limit_measure_nu(sphere_ev(), SymbolFn::angular_ratio([](double s) { return s * s; }));
  for (double c : {-0.8, 0.1, 0.7}) EXPECT_NEAR(sq.density(c), 1.5 * c * c, 1e-10);
  EXPECT_NEAR(sq.cdf(0.5), 0.5 + 0.5 * 0.125, 1e-10);
  // b vanishes only on the equator
  const double r0 = ellipsoid_ev().profile().r0;
  const auto vanish = limit_measure_nu(ellipsoid_ev(), SymbolFn::radial_mult([r0](double r) { return (r - r0) * (r - r0); }));
  for (double c : {-0.999, -0.5, 0.0, 0.5, 0.999}) {
    EXPECT_GT(vanish.density(c), 0.0);
    EXPECT_TRUE(std::isfinite(vanish.density(c)));
  }
}

TEST(LimitMeasures, VanishingLiouvilleState) {
  try {
    limit_measure_nu(sphere_ev(), SymbolFn::angular_ratio([](double s) { return s; }));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SignedMeasure);
  }
}

TEST(Distances, KsExamples) {
  EmpiricalMeasure delta;
  delta.atoms = {{0.0, 1.0}};
  EXPECT_NEAR(ks_distance(delta, arcsine()), 0.5, 1e-15);
  // atoms at the quantiles of the limit
  const int k = 40;
  EmpiricalMeasure q;
  for (int j = 0; j < k; ++j) q.atoms.push_back({std::sin(std::numbers::pi * ((j + 0.5) / k - 0.5)), 1.0 / k});
  EXPECT_LE(ks_distance(q, arcsine()), 1.0 / k + 1e-12);
}

TEST(Distances, WassersteinExamples) {
  EmpiricalMeasure d0;
  d0.atoms = {{0.0, 1.0}};
  LimitMeasure d1;
  d1.cdf = [](double c) { return c >= 1.0 ? 1.0 : 0.0; };
  EXPECT_NEAR(wasserstein1(d0, d1), 1.0, 1e-14);
  LimitMeasure same;
  same.cdf = [](double c) { return c >= 0.0 ? 1.0 : 0.0; };
  EXPECT_NEAR(wasserstein1(d0, same), 0.0, 1e-15);
  // mu_1 on the sphere: F = 1/2 on [-1, 1), so W1 = int |asin c| / pi dc = 1 - 2/pi
  EXPECT_NEAR(wasserstein1(oracle_mu(1), arcsine()), 1.0 - 2.0 / std::numbers::pi, 1e-13);
}

TEST(Distances, WassersteinAgainstFineReference) {
  const auto mu = oracle_mu(30);
  auto F = [&](double c) {
    double s = 0.0;
    for (const auto& a : mu.atoms)
      if (a.c <= c) s += a.w;
    return s;
  };
  // midpoint rule in t = asin c, 2e6 cells
  const int n = 2000000;
  double ref = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = -std::numbers::pi / 2 + std::numbers::pi * (i + 0.5) / n;
    ref += std::abs(F(std::sin(t)) - arcsine().cdf(std::sin(t))) * std::cos(t);
  }
  ref *= std::numbers::pi / n;
  EXPECT_NEAR(wasserstein1(mu, arcsine()), ref, 1e-6);
}

TEST(PowerFit, RecoversExponent) {
  const auto f = fit_power_law({10, 20, 40, 80}, {3.0 / 10, 3.0 / 20, 3.0 / 40, 3.0 / 80});
  EXPECT_NEAR(f.exponent, -1.0, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_EQ(f.points, 4);
}

TEST(Sweep, SphereClosedFormDecreasing) {
  SweepOptions opt;
  opt.sphere_closed_form = true;
  const auto rep = convergence_sweep(sphere(), sphere_ev(), {25, 50, 100}, std::nullopt, opt);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) EXPECT_LT(rep.rows[i].w1_mu, rep.rows[i - 1].w1_mu);
  EXPECT_NEAR(rep.rows[2].M_ell / rep.rows[1].M_ell, 2.0, 0.2);
  EXPECT_LT(rep.fit.exponent, -0.5);
}

TEST(Sweep, SolverAgreesWithOracle) {
  SweepOptions closed;
  closed.sphere_closed_form = true;
  const std::vector<int> ells{10, 20, 40};
  const auto a = convergence_sweep(sphere(), sphere_ev(), ells, std::nullopt, closed);
  const auto b = convergence_sweep(sphere(), sphere_ev(), ells, std::nullopt, {});
  for (std::size_t i = 0; i < ells.size(); ++i) {
    ASSERT_FALSE(b.rows[i].error.has_value());
    EXPECT_NEAR(a.rows[i].w1_mu, b.rows[i].w1_mu, 1e-6);
    EXPECT_NEAR(a.rows[i].M_ell / b.rows[i].M_ell, 1.0, 1e-6);
  }
}

TEST(Sweep, IdentitySymbolIsNearUniform) {
  const auto rep = convergence_sweep(sphere(), sphere_ev(), {8, 16}, SymbolFn::identity(), {});
  for (const auto& row : rep.rows) {
    ASSERT_TRUE(row.ks_nu.has_value());
    EXPECT_LE(*row.ks_nu, 1.0 / (2 * row.ell + 1) + 1e-6);
    EXPECT_LE(*row.w1_nu, 1.0 / (2 * row.ell + 1) + 1e-6);
  }
}

TEST(Sweep, ErrorsAreRecordedPerEll) {
  SweepOptions coarse;
  coarse.spectral.grid_size = 100;
  const auto rep = convergence_sweep(sphere(), sphere_ev(), {3, 5}, std::nullopt, coarse);
  for (const auto& row : rep.rows) EXPECT_TRUE(row.error.has_value());
  EXPECT_THROW(convergence_sweep(sphere(), sphere_ev(), {5, 3}, std::nullopt, {}), Error);
}

TEST(Sweep, SignedNuHasNoDistances) {
  const auto rep = convergence_sweep(sphere(), sphere_ev(), {6},
                                     SymbolFn::angular_ratio([](double s) { return s * s - 0.2; }), {});
  EXPECT_TRUE(rep.rows[0].nu_signed);
  EXPECT_FALSE(rep.rows[0].ks_nu.has_value());
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  const std::vector<int> ells{4, 7, 9};
  setenv("REVTONE_THREADS", "1", 1);
  const auto a = convergence_sweep(sphere(), sphere_ev(), ells, SymbolFn::identity(), {});
  setenv("REVTONE_THREADS", "4", 1);
  const auto b = convergence_sweep(sphere(), sphere_ev(), ells, SymbolFn::identity(), {});
  unsetenv("REVTONE_THREADS");
  for (std::size_t i = 0; i < ells.size(); ++i) {
    EXPECT_EQ(a.rows[i].w1_mu, b.rows[i].w1_mu);
    EXPECT_EQ(a.rows[i].ks_nu, b.rows[i].ks_nu);
  }
}

TEST(Properties, PolynomialMomentsApproachLimit) {
  // exact arcsine moments: E[c^2] = 1/2, E[c^4] = 3/8, odd = 0
  const double exact[5] = {1.0, 0.0, 0.5, 0.0, 0.375};
  for (int k = 0; k <= 4; ++k) {
    double prev = 1e9;
    for (int ell : {25, 50, 100, 200, 400}) {
      const auto mu = empirical_mu_sphere(ell);
      const double err = std::abs(mu.integrate([k](double c) { return std::pow(c, k); }) - exact[k]);
      EXPECT_LE(err, prev * 1.05 + 1e-15) << k << " " << ell;
      prev = err;
    }
  }
}

TEST(Properties, TraceIdentityForAngularSymbols) {
  const auto chi = [](double s) { return 1.0 + s * s; };
  const auto slice = joint_slice(make_ellipsoid(1.3), ellipsoid_ev(), 9);
  const auto nu = empirical_nu(slice, SymbolFn::angular_ratio(chi));
  const auto f = [](double c) { return std::cos(3 * c) + c; };
  double num = 0.0, den = 0.0;
  for (const auto& mode : slice.modes) {
    const double w = chi(mode.m / mode.lambda);
    num += f(static_cast<double>(mode.m) / slice.ell) * w;
    den += w;
  }
  EXPECT_NEAR(nu.integrate(f), num / den, 1e-12);
}
