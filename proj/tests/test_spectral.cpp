#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "revtone/spectral.hpp"

using namespace revtone;

namespace {

const SurfaceProfile& sphere() {
  static const SurfaceProfile p = make_round_sphere();
  return p;
}

const SurfaceProfile& ellipsoid() {
  static const SurfaceProfile p = make_ellipsoid(1.3);
  return p;
}

const ActionEvaluator& sphere_ev() {
  static const ActionEvaluator ev(sphere());
  return ev;
}

const ActionEvaluator& ellipsoid_ev() {
  static const ActionEvaluator ev(ellipsoid());
  return ev;
}

}  // namespace

TEST(RadialModes, SphereLowModes) {
  const auto modes = radial_modes(sphere(), 0, 1);
  EXPECT_NEAR(modes[0].lambda_sq, 0.0, 1e-9);
  EXPECT_NEAR(modes[1].lambda_sq, 2.0, 2e-8);
  const auto m2 = radial_mode(sphere(), 2, 1);
  EXPECT_EQ(m2.ell, 3);
  EXPECT_NEAR(m2.lambda_sq, 12.0, 12 * 1e-8);
}

TEST(RadialModes, NormalizationAndNodeCounts) {
  for (const SurfaceProfile* p : {&sphere(), &ellipsoid()})
    for (int m : {0, 1, 4}) {
      const auto modes = radial_modes(*p, m, 6);
      double prev = -1.0;
      for (std::size_t n = 0; n < modes.size(); ++n) {
        const auto& mode = modes[n];
        EXPECT_EQ(detail::count_sign_changes(mode.u), static_cast<int>(n));
        EXPECT_EQ(mode.n, static_cast<int>(n));
        EXPECT_EQ(mode.ell, m + static_cast<int>(n));
        double norm = 0.0;
        for (std::size_t i = 0; i < mode.u.size(); ++i) norm += mode.grid->weight[i] * mode.u[i] * mode.u[i];
        EXPECT_NEAR(norm, 1.0, 1e-8);
        EXPECT_GT(mode.lambda, prev);
        prev = mode.lambda;
      }
    }
}

TEST(RadialModes, NegativeMSameSpectrum) {
  for (const SurfaceProfile* p : {&sphere(), &ellipsoid()})
    for (int m : {1, 3, 7}) {
      const auto pos = radial_modes(*p, m, 4), neg = radial_modes(*p, -m, 4);
      for (std::size_t n = 0; n < pos.size(); ++n) {
        EXPECT_LE(std::abs(pos[n].lambda - neg[n].lambda), 1e-12);
        EXPECT_EQ(neg[n].m, -m);
      }
    }
}

TEST(RadialModes, SecondOrderConvergenceWithoutExtrapolation) {
  SpectralOptions a{1000, false}, b{2000, false}, c{4000, false};
  for (int m : {0, 3}) {
    const int n = 2;
    const double exact = (m + n) * (m + n + 1.0);
    const double e1 = std::abs(radial_mode(sphere(), m, n, a).lambda_sq - exact);
    const double e2 = std::abs(radial_mode(sphere(), m, n, b).lambda_sq - exact);
    const double e3 = std::abs(radial_mode(sphere(), m, n, c).lambda_sq - exact);
    EXPECT_GE(std::log2(e1 / e2), 1.8) << m;
    EXPECT_GE(std::log2(e2 / e3), 1.8) << m;
  }
}

TEST(RadialModes, ResolutionAndGridErrors) {
  try {
    radial_modes(sphere(), 0, 3, {100, true});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidParameter);
  }
  try {
    radial_mode(sphere(), 0, 200, {500, false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ResolutionError);
  }
}

TEST(JointSlice, SphereEllOne) {
  const auto s = joint_slice(sphere(), sphere_ev(), 1);
  ASSERT_EQ(s.modes.size(), 3u);
  for (const auto& mode : s.modes) EXPECT_NEAR(mode.lambda_sq, 2.0, 1e-8);
  EXPECT_NEAR(s.norm(0), 0.0, 1e-12);
  EXPECT_NEAR(s.norm(1), 0.75, 1e-8);
  EXPECT_NEAR(s.norm(-1), 0.75, 1e-8);
}

TEST(JointSlice, SphereEllTen) {
  const auto s = joint_slice(sphere(), sphere_ev(), 10);
  ASSERT_EQ(s.modes.size(), 21u);
  for (int m = -10; m <= 10; ++m) {
    EXPECT_EQ(s.mode(m).m, m);
    EXPECT_NEAR(s.mode(m).lambda_sq / 110.0, 1.0, 1e-6);
    EXPECT_NEAR(s.ebk_residuals[m + 10], std::sqrt(110.0) - 10.5, 1e-7);
  }
}

TEST(JointSlice, EllipsoidSymmetricInM) {
  const auto s = joint_slice(ellipsoid(), ellipsoid_ev(), 10);
  double spread = 0.0;
  for (int m = 1; m <= 10; ++m) {
    EXPECT_LE(std::abs(s.mode(m).lambda - s.mode(-m).lambda), 1e-12);
    EXPECT_LE(std::abs(s.norm(m) - s.norm(-m)), 1e-12);
    spread = std::max(spread, std::abs(s.mode(m).lambda - s.mode(0).lambda));
  }
  EXPECT_GT(spread, 1e-2);
}

TEST(RestrictedNorm, SphereExamples) {
  EXPECT_NEAR(restricted_norm(radial_mode(sphere(), 0, 1), sphere()), 0.0, 1e-12);
  EXPECT_NEAR(restricted_norm(radial_mode(sphere(), 1, 0), sphere()), 0.75, 1e-8);
  EXPECT_NEAR(restricted_norm(radial_mode(sphere(), 0, 2), sphere()), 0.625, 1e-8);
}

TEST(RestrictedNorm, ClosedFormAgainstRecurrence) {
  for (int ell = 0; ell <= 60; ++ell)
    for (int m = -ell; m <= ell; ++m)
      EXPECT_NEAR(sphere_restricted_norm(ell, m), oracle::legendre_equator_norm(ell, m), 1e-12) << ell << " " << m;
}

TEST(RestrictedNorm, SolverAgainstLegendreOracle) {
  for (int m = 0; m <= 12; ++m) {
    const auto modes = radial_modes(sphere(), m, 12 - m);
    for (const auto& mode : modes) {
      const double v = restricted_norm(mode, sphere());
      EXPECT_NEAR(v, oracle::legendre_equator_norm(mode.ell, m), 1e-7) << mode.ell << " " << m;
      if ((mode.ell - m) % 2 == 1) {
        EXPECT_LE(v, 1e-12);
      }
    }
  }
}

TEST(MatrixElement, Radial) {
  const auto mode = radial_mode(sphere(), 0, 1);
  EXPECT_NEAR(matrix_element_radial(mode, [](double) { return 1.0; }), 1.0, 1e-8);
  EXPECT_NEAR(matrix_element_radial(mode, [](double r) { return std::cos(r); }), 0.0, 1e-10);
  // Gaussian beam (ell = m = 20) barely sees a bump near the pole
  const auto beam = radial_mode(sphere(), 20, 0);
  auto bump = [](double r) {
    const double x = (r - std::numbers::pi / 8) / (std::numbers::pi / 16);
    return std::abs(x) < 1 ? std::exp(-1.0 / (1 - x * x)) : 0.0;
  };
  EXPECT_LE(matrix_element_radial(beam, bump), 1e-3);
}

TEST(MatrixElement, Angular) {
  const auto mode = radial_mode(sphere(), 10, 0);
  EXPECT_NEAR(matrix_element_angular(mode, [](double) { return 1.0; }), 1.0, 0.0);
  EXPECT_NEAR(matrix_element_angular(mode, [](double s) { return s; }), 10.0 / std::sqrt(110.0), 1e-9);
  EXPECT_EQ(matrix_element_angular(radial_mode(sphere(), 0, 3), [](double s) { return s * s; }), 0.0);
}

TEST(Ebk, SphereResidualShrinks) {
  const double r10 = ebk_residual(radial_mode(sphere(), 3, 7), sphere_ev());
  EXPECT_NEAR(r10, std::sqrt(110.0) - 10.5, 1e-7);
  // ell = 100 needs a finer grid than the default for 1e-6 absolute in lambda
  const double r100 = ebk_residual(radial_mode(sphere(), 0, 100, {16000, true}), sphere_ev());
  EXPECT_NEAR(r100, std::sqrt(10100.0) - 100.5, 1e-6);
  EXPECT_NEAR(r100 / r10, 10.5 / 100.5, 0.01);
}

TEST(Ebk, EllipsoidResidualSmallAndDecreasing) {
  double prev = 1e9;
  for (int ell : {10, 20, 40}) {
    const double r = std::abs(ebk_residual(radial_mode(ellipsoid(), 0, ell), ellipsoid_ev()));
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_LE(prev, 0.05);
}

TEST(Weyl, MassGrowsLinearly) {
  auto mass = [](int ell) {
    double s = 0.0;
    for (int m = -ell; m <= ell; ++m) s += sphere_restricted_norm(ell, m);
    return s;
  };
  EXPECT_NEAR(mass(200) / mass(100), 2.0, 0.2);
  const auto s25 = joint_slice(ellipsoid(), ellipsoid_ev(), 25), s50 = joint_slice(ellipsoid(), ellipsoid_ev(), 50);
  double m25 = 0, m50 = 0;
  for (double v : s25.restricted_norms) m25 += v;
  for (double v : s50.restricted_norms) m50 += v;
  EXPECT_NEAR(m50 / m25, 2.0, 0.2);
}

TEST(Determinism, SliceBitIdentical) {
  const auto a = joint_slice(ellipsoid(), ellipsoid_ev(), 6), b = joint_slice(ellipsoid(), ellipsoid_ev(), 6);
  EXPECT_EQ(a.restricted_norms, b.restricted_norms);
  for (std::size_t i = 0; i < a.modes.size(); ++i) EXPECT_EQ(a.modes[i].lambda, b.modes[i].lambda);
}
