#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>

#include "revtone/error.hpp"
#include "revtone/interp.hpp"
#include "revtone/quadrature.hpp"
#include "revtone/roots.hpp"
#include "revtone/surface.hpp"

namespace revtone {

/// Principal symbol of an order-zero operator, restricted to the classes we
/// can quantize without a full pseudodifferential calculus.
struct SymbolFn {
  enum class Kind { RadialMult, AngularRatio, PhaseSpace };
  using PhaseFn = std::function<double(double r, double theta, double rho, double eta)>;

  Kind kind = Kind::RadialMult;
  RealFn radial;  // b(r)
  RealFn ratio;   // chi(p_theta / |xi|)
  PhaseFn full;   // sigma(r, theta, rho, eta), homogeneous of degree 0 in (rho, eta)

  static SymbolFn radial_mult(RealFn b) { return {Kind::RadialMult, std::move(b), {}, {}}; }
  static SymbolFn angular_ratio(RealFn chi) { return {Kind::AngularRatio, {}, std::move(chi), {}}; }
  static SymbolFn phase_space(PhaseFn f) { return {Kind::PhaseSpace, {}, {}, std::move(f)}; }
  static SymbolFn identity() { return radial_mult([](double) { return 1.0; }); }
};

inline std::string_view to_string(SymbolFn::Kind k) {
  switch (k) {
    case SymbolFn::Kind::RadialMult: return "radial_mult";
    case SymbolFn::Kind::AngularRatio: return "angular_ratio";
    case SymbolFn::Kind::PhaseSpace: return "phase_space";
  }
  return "unknown";
}

/// Largest deviation |sigma(r, theta, t rho, t eta) - sigma(r, theta, rho, eta)| over a fixed sample.
inline double homogeneity_defect(const SymbolFn& sym, const SurfaceProfile& p) {
  if (sym.kind != SymbolFn::Kind::PhaseSpace) return 0.0;
  double worst = 0.0;
  for (int i = 1; i < 8; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 6; ++k) {
        const double r = p.length * i / 8.0;
        const double theta = 2.0 * std::numbers::pi * j / 5.0;
        const double rho = std::cos(0.7 * k + 0.3), eta = std::sin(0.7 * k + 0.3);
        const double base = sym.full(r, theta, rho, eta);
        for (double t : {0.5, 2.0, 10.0}) worst = std::max(worst, std::abs(sym.full(r, theta, t * rho, t * eta) - base));
      }
  return worst;
}

struct TurningPoints {
  double inner = 0.0;
  double outer = 0.0;
};

struct Frequencies {
  double omega1 = 0.0;
  double omega2 = 0.0;
};

/// f on (-1, 1) tabulated through the substitution c = sin t, which absorbs
/// (1 - c^2)^(-1/2) endpoint behaviour into a smooth integrand.
class DensityTable {
 public:
  DensityTable() = default;

  template <class F>
  DensityTable(F&& f, int nodes) {
    constexpr double half_pi = std::numbers::pi / 2;
    integrand_ = interp::ChebyshevSeries::fit([&](double t) { return f(std::sin(t)) * std::cos(t); }, -half_pi, half_pi,
                                              nodes);
    antiderivative_ = integrand_.antiderivative();
    mass_ = antiderivative_(half_pi);
  }

  double mass() const { return mass_; }

  /// Normalized cumulative mass on [-1, c].
  double cdf(double c) const {
    if (c <= -1.0) return 0.0;
    if (c >= 1.0) return 1.0;
    return std::clamp(antiderivative_(std::asin(c)) / mass_, 0.0, 1.0);
  }

 private:
  interp::ChebyshevSeries integrand_, antiderivative_;
  double mass_ = 0.0;
};

/// Action-angle machinery for one convex profile.
///
/// I1 = c is the angular momentum and I2(c, E) the second action at energy
/// E = |xi|_g:
///
///   I2(c, E) = (1/pi) int_{r1}^{r2} sqrt(E^2 - c^2 / a(r)^2) dr + |c|
///
/// between the turning points a(r1) = a(r2) = |c| / E.  All endpoint
/// singularities are integrated with a fixed tanh-sinh rule.  The evaluator
/// is immutable; the limit-density table is built lazily under a once-flag,
/// so concurrent use is race-free and deterministic.
class ActionEvaluator {
 public:
  struct Options {
    int quad_nodes = 256;
    double fd_step = 1e-6;
    double newton_tol = 1e-11;
    int cdf_nodes = 128;
    int theta_nodes = 32;
  };

  explicit ActionEvaluator(SurfaceProfile profile) : ActionEvaluator(std::move(profile), Options{}) {}

  ActionEvaluator(SurfaceProfile profile, Options options)
      : profile_(std::move(profile)),
        options_(options),
        rule_(std::make_shared<const quad::TanhSinhRule>(check_nodes(options.quad_nodes))),
        cache_(std::make_shared<Cache>()) {
    if (!(options_.fd_step > 0.0 && options_.fd_step < 1e-2)) fail(ErrorKind::InvalidParameter, "fd_step out of range");
    if (!(options_.newton_tol > 0.0)) fail(ErrorKind::InvalidParameter, "newton_tol must be positive");
    if (options_.cdf_nodes < 8) fail(ErrorKind::InvalidParameter, "cdf_nodes must be >= 8");
  }

  const SurfaceProfile& profile() const { return profile_; }
  const Options& options() const { return options_; }

  TurningPoints turning_points(double c, double E) const {
    check_energy(E);
    const double ac = std::abs(c);
    if (ac == 0.0) return {0.0, profile_.length};
    if (ac >= E * profile_.a_r0) fail(ErrorKind::DegenerateTorus, "|c| >= E a(r0): torus collapses onto the equator");
    const double level = ac / E;
    // Poles are zeros of a by validation; pin them so rounding there cannot break the bracket.
    const double L = profile_.length;
    auto f = [&](double r) { return (r <= 0.0 || r >= L) ? -level : profile_.a(r) - level; };
    const double r1 = roots::bisect(f, 0.0, profile_.r0, 0.0);
    const double r2 = roots::bisect(f, profile_.r0, profile_.length, 0.0);
    return {r1, r2};
  }

  double action(double c, double E) const {
    check_energy(E);
    const double ac = std::abs(c);
    if (threshold_side(ac, E) >= 0) return ac;
    const Torus t = torus(ac, E);
    return integrate(t, [&](double rho, double) { return rho; }) / std::numbers::pi + ac;
  }

  double action_dE(double c, double E) const {
    check_energy(E);
    if (threshold_side(std::abs(c), E) >= 0) fail(ErrorKind::DegenerateTorus, "dI2/dE undefined on the equator level");
    const Torus t = torus(std::abs(c), E);
    return integrate(t, [&](double rho, double) { return E / rho; }) / std::numbers::pi;
  }

  double action_dc(double c, double E) const {
    check_energy(E);
    if (threshold_side(std::abs(c), E) >= 0) fail(ErrorKind::DegenerateTorus, "dI2/dc undefined on the equator level");
    if (c == 0.0) return 0.0;
    const double ac = std::abs(c);
    const Torus t = torus(ac, E);
    const double j = integrate(t, [&](double rho, double a) { return -ac / (a * a * rho); }) / std::numbers::pi;
    return (c > 0.0 ? 1.0 : -1.0) * (j + 1.0);
  }

  /// Energy K(c, I2): the unique E with action(c, E) = I2.
  double energy(double c, double I2) const {
    if (!(I2 > 0.0) || !std::isfinite(I2)) fail(ErrorKind::InvalidParameter, "I2 must be positive");
    const double ac = std::abs(c);
    if (ac > I2 * (1.0 + 1e-14)) fail(ErrorKind::OutsideMomentImage, "|c| > I2");
    if (ac >= I2) return ac / profile_.a_r0;
    if (ac == 0.0) return std::numbers::pi * I2 / profile_.length;
    const double excess = I2 - ac;
    const double lo = ac / profile_.a_r0;
    double hi = 2.0 * lo + excess;
    for (int i = 0; i < 200 && excess_action(ac, hi) < excess; ++i) hi *= 2.0;
    auto fdf = [&](double E) {
      const Torus t = torus(ac, E);
      const double j = integrate(t, [&](double rho, double) { return rho; }) / std::numbers::pi;
      const double dj = integrate(t, [&](double rho, double) { return E / rho; }) / std::numbers::pi;
      return std::pair{j - excess, dj};
    };
    const double guess = lo + excess * std::numbers::pi / profile_.length;
    return roots::newton_increasing(fdf, lo, hi, guess, options_.newton_tol * std::max(1.0, I2));
  }

  /// (omega1, omega2) = grad K at I2 = 1.
  Frequencies frequencies(double c) const {
    if (!(std::abs(c) <= 1.0)) fail(ErrorKind::OutsideMomentImage, "|c| > 1");
    const double inv = 1.0 / (profile_.a_r0 * profile_.a_r0);
    if (std::abs(c) == 1.0) return {std::copysign(inv, c), inv};
    const TorusData d = torus_data(c);
    return {-d.dI2_dc / d.dI2_dE, 1.0 / d.dI2_dE};
  }

  /// omega2(c, 1) / sqrt(1 - c^2 / (K(c, 1)^2 a(r0)^2)) on the open interval.
  double limit_density_unnorm(double c) const {
    if (!(std::abs(c) < 1.0)) fail(ErrorKind::OutsideOpenInterval, "limit density needs |c| < 1");
    const TorusData d = torus_data(c);
    return (1.0 / d.dI2_dE) / std::sqrt(d.tangential_gap);
  }

  double normalization() const { return density_table().mass(); }

  double limit_cdf(double c) const {
    if (!(std::abs(c) <= 1.0)) fail(ErrorKind::OutsideMomentImage, "limit_cdf needs |c| <= 1");
    return density_table().cdf(c);
  }

  const DensityTable& density_table() const {
    std::call_once(cache_->once, [this] {
      cache_->table = DensityTable([this](double c) { return limit_density_unnorm(c); }, options_.cdf_nodes);
    });
    return cache_->table;
  }

  /// Normalized Haar average of the symbol over the torus T_c at I2 = 1.
  double torus_average(const SymbolFn& sym, double c) const {
    if (!(std::abs(c) < 1.0)) fail(ErrorKind::DegenerateTorus, "torus average needs |c| < 1");
    const double E = energy(c, 1.0);
    if (sym.kind == SymbolFn::Kind::AngularRatio) return sym.ratio(c / E);
    const double ac = std::abs(c);
    const Torus t = torus(ac, E);
    const double period = integrate(t, [&](double rho, double) { return E / rho; });
    if (sym.kind == SymbolFn::Kind::RadialMult) {
      const double num = integrate_r(t, [&](double r, double rho, double) { return sym.radial(r) * E / rho; });
      return num / period;
    }
    const int nt = options_.theta_nodes;
    double num = 0.0;
    for (int k = 0; k < nt; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / nt;
      for (double s : {-1.0, 1.0})
        num += integrate_r(t, [&](double r, double rho, double) { return sym.full(r, theta, s * rho, c) * E / rho; });
    }
    return num / (2.0 * nt * period);
  }

  DensityTable torus_average_table(const SymbolFn& sym) const {
    return DensityTable([&](double c) { return torus_average(sym, c); }, options_.cdf_nodes);
  }

  /// int_{-1}^{1} torus_average(c) dc; this fixes the normalization of the Liouville state.
  double liouville_state(const SymbolFn& sym) const { return torus_average_table(sym).mass(); }

  struct EquatorDerivative {
    double finite_difference = 0.0;
    double predicted = 0.0;
  };

  /// At the equator point with momentum (rho, c) on {I2 = 1}: centered finite
  /// difference of I2 in rho against sqrt(1 - c^2/(E^2 a(r0)^2)) / omega2.
  EquatorDerivative equator_rho_derivative(double c) const {
    if (!(std::abs(c) < 1.0)) fail(ErrorKind::DegenerateTorus, "needs |c| < 1");
    const double a0 = profile_.a_r0;
    const double E = energy(c, 1.0);
    const double rho = std::sqrt(std::max(0.0, E * E - c * c / (a0 * a0)));
    const double h = std::min(options_.fd_step * E, 0.5 * rho);
    auto energy_of = [&](double p) { return std::sqrt(p * p + c * c / (a0 * a0)); };
    const double fd = (action(c, energy_of(rho + h)) - action(c, energy_of(rho - h))) / (2.0 * h);
    const double w2 = frequencies(c).omega2;
    return {fd, std::sqrt(1.0 - c * c / (E * E * a0 * a0)) / w2};
  }

 private:
  struct Cache {
    std::once_flag once;
    DensityTable table;
  };

  // Turning-point data needed for cancellation-free evaluation of
  // E^2 a(r)^2 - c^2 close to the endpoints.
  struct Torus {
    double c = 0.0;  // |c|
    double E = 0.0;
    double r1 = 0.0, r2 = 0.0;
    double d1_inner = 0.0, d2_inner = 0.0;
    double d1_outer = 0.0, d2_outer = 0.0;
  };

  struct TorusData {
    double E = 0.0;
    double dI2_dE = 0.0;
    double dI2_dc = 0.0;
    double tangential_gap = 0.0;  // 1 - c^2 / (E^2 a(r0)^2)
  };

  static int check_nodes(int n) {
    if (n < 64) fail(ErrorKind::InvalidParameter, "quad_nodes must be >= 64");
    return n;
  }

  static void check_energy(double E) {
    if (!(E > 0.0) || !std::isfinite(E)) fail(ErrorKind::InvalidParameter, "energy must be positive");
  }

  // -1 inside the moment image, 0 on the tangential threshold; throws beyond it.
  int threshold_side(double ac, double E) const {
    const double ratio = ac / (E * profile_.a_r0);
    if (ratio > 1.0 + 1e-14) fail(ErrorKind::OutsideMomentImage, "|c| > E a(r0)");
    return ratio >= 1.0 ? 0 : -1;
  }

  Torus torus(double ac, double E) const {
    Torus t;
    t.c = ac;
    t.E = E;
    const TurningPoints tp = turning_points(ac, E);
    t.r1 = tp.inner;
    t.r2 = tp.outer;
    if (ac > 0.0) {
      t.d1_inner = profile_.da(t.r1);
      t.d2_inner = profile_.d2a(t.r1);
      t.d1_outer = profile_.da(t.r2);
      t.d2_outer = profile_.d2a(t.r2);
    }
    return t;
  }

  double excess_action(double ac, double E) const {
    if (threshold_side(ac, E) >= 0) return 0.0;
    return integrate(torus(ac, E), [&](double rho, double) { return rho; }) / std::numbers::pi;
  }

  // f(r, rho(r), a(r)) integrated over [r1, r2], with
  // rho = sqrt(E^2 - c^2/a^2) evaluated from the endpoint Taylor data when
  // a node sits within 1e-6 of the span from a turning point.
  template <class F>
  double integrate_r(const Torus& t, F&& f) const {
    const double span = t.r2 - t.r1;
    const double near = 1e-6 * span;
    const double E = t.E, c = t.c;
    const double level = c / E;
    return rule_->integrate(
        [&](double r, double dl, double dr) {
          const double a = profile_.a(r);
          if (c == 0.0) return f(r, E, a);
          double gap;  // E^2 a^2 - c^2
          double a_eff = a;
          if (dl <= dr && dl < near) {
            const double delta = t.d1_inner * dl + 0.5 * t.d2_inner * dl * dl;
            gap = E * delta * (2.0 * c + E * delta);
            a_eff = level + delta;
          } else if (dr < dl && dr < near) {
            const double delta = -t.d1_outer * dr + 0.5 * t.d2_outer * dr * dr;
            gap = E * delta * (2.0 * c + E * delta);
            a_eff = level + delta;
          } else {
            gap = (E * a - c) * (E * a + c);
          }
          if (!(gap > 0.0)) return 0.0;
          const double rho = std::sqrt(gap) / a_eff;
          return f(r, rho, a_eff);
        },
        t.r1, t.r2);
  }

  template <class F>
  double integrate(const Torus& t, F&& f) const {
    return integrate_r(t, [&](double, double rho, double a) { return f(rho, a); });
  }

  TorusData torus_data(double c) const {
    TorusData d;
    const double ac = std::abs(c);
    d.E = energy(c, 1.0);
    const Torus t = torus(ac, d.E);
    d.dI2_dE = integrate(t, [&](double rho, double) { return d.E / rho; }) / std::numbers::pi;
    if (ac > 0.0) {
      const double j = integrate(t, [&](double rho, double a) { return -ac / (a * a * rho); }) / std::numbers::pi;
      d.dI2_dc = (c > 0.0 ? 1.0 : -1.0) * (j + 1.0);
    }
    const double ea = d.E * profile_.a_r0;
    d.tangential_gap = (ea - ac) * (ea + ac) / (ea * ea);
    return d;
  }

  SurfaceProfile profile_;
  Options options_;
  std::shared_ptr<const quad::TanhSinhRule> rule_;
  std::shared_ptr<Cache> cache_;
};

}  // namespace revtone
