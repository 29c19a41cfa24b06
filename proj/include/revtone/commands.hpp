#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "revtone/actions.hpp"
#include "revtone/config.hpp"
#include "revtone/error.hpp"
#include "revtone/io.hpp"
#include "revtone/measures.hpp"
#include "revtone/spectral.hpp"
#include "revtone/surface.hpp"

namespace revtone::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { kSuccess = 0, kVerificationFailure = 1, kConfigError = 2, kNumericalFailure = 3 };

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidParameter:
    case ErrorKind::RejectedProfile:
    case ErrorKind::UnsupportedQuantization:
      return kConfigError;
    default:
      return kNumericalFailure;
  }
}

inline std::filesystem::path out_path(const RunConfig& cfg, const std::string& file) {
  return std::filesystem::path(cfg.out_dir) / file;
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Builds the configured profile; `check` off leaves table profiles unvalidated.
inline SurfaceProfile build_profile(const RunConfig& cfg, bool check = true) {
  if (cfg.profile_kind == "round_sphere") return make_round_sphere();
  if (cfg.profile_kind == "ellipsoid") return make_ellipsoid(cfg.aspect);
  if (cfg.table_path.empty()) fail(ErrorKind::ConfigError, "profile.kind = custom_table needs profile.table_path");
  return load_profile_table(cfg.table_path, check);
}

inline int cmd_validate(const RunConfig& cfg, std::ostream& log) {
  const SurfaceProfile p = build_profile(cfg, false);
  const ValidationReport rep = validate_profile(p);
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"residual", c.residual}, {"detail", c.detail}});
  json doc = {{"profile", p.name}, {"length", p.length}, {"r0", p.r0}, {"a_r0", p.a_r0},
              {"valid", rep.passed()}, {"checks", checks}};
  io::write_atomic(out_path(cfg, "validation.json"), doc.dump(2) + "\n");
  if (rep.passed()) {
    log << "profile " << p.name << " is valid\n";
    return kSuccess;
  }
  log << "profile " << p.name << " rejected: " << rep.failures() << "\n";
  return kVerificationFailure;
}

/// Density table on c_k = -1 + 2k/N, k = 1 .. N-1.
inline io::CsvTable density_table(const ActionEvaluator& ev, int points) {
  const double M = ev.normalization();
  io::CsvTable t;
  t.header = {"c", "density_unnorm", "density_norm", "cdf"};
  t.rows.resize(static_cast<std::size_t>(points - 1));
  parallel_for(t.rows.size(), [&](std::size_t i) {
    const double c = -1.0 + 2.0 * static_cast<double>(i + 1) / points;
    const double d = ev.limit_density_unnorm(c);
    t.rows[i] = {c, d, d / M, ev.limit_cdf(c)};
  });
  return t;
}

inline int cmd_density(const RunConfig& cfg, std::ostream& log) {
  const SurfaceProfile p = build_profile(cfg);
  const ActionEvaluator ev(p, cfg.actions);
  const io::CsvTable t = density_table(ev, cfg.density_points);
  io::write_atomic(out_path(cfg, "density.csv"), io::to_csv(t));
  log << "wrote " << t.rows.size() << " rows, M = " << io::format_double(ev.normalization()) << "\n";
  return kSuccess;
}

inline io::CsvTable slice_table(const JointSlice& s) {
  io::CsvTable t;
  t.header = {"ell", "m", "n", "lambda", "restricted_norm", "ebk_residual"};
  for (std::size_t i = 0; i < s.modes.size(); ++i) {
    const RadialMode& mode = s.modes[i];
    t.rows.push_back({static_cast<double>(s.ell), static_cast<double>(mode.m), static_cast<double>(mode.n), mode.lambda,
                      s.restricted_norms[i], s.ebk_residuals[i]});
  }
  return t;
}

inline int cmd_spectrum(const RunConfig& cfg, std::ostream& log) {
  if (cfg.ells.empty()) fail(ErrorKind::ConfigError, "run.ells is empty");
  const SurfaceProfile p = build_profile(cfg);
  const ActionEvaluator ev(p, cfg.actions);
  json errors = json::array();
  for (int ell : cfg.ells) {
    try {
      const JointSlice s = joint_slice(p, ev, ell, cfg.spectral);
      io::write_atomic(out_path(cfg, "slice_" + std::to_string(ell) + ".csv"), io::to_csv(slice_table(s)));
      log << "ell " << ell << ": " << s.modes.size() << " modes\n";
    } catch (const Error& e) {
      errors.push_back({{"ell", ell}, {"kind", std::string(to_string(e.kind()))}, {"message", e.what()}});
      log << "ell " << ell << ": " << e.what() << "\n";
    }
  }
  io::write_atomic(out_path(cfg, "errors.json"), json{{"errors", errors}}.dump(2) + "\n");
  return errors.empty() ? kSuccess : kNumericalFailure;
}

inline int cmd_converge(const RunConfig& cfg, std::ostream& log) {
  if (cfg.ells.empty()) fail(ErrorKind::ConfigError, "run.ells is empty");
  const SurfaceProfile p = build_profile(cfg);
  const ActionEvaluator ev(p, cfg.actions);
  const auto sym = build_symbol(cfg);
  SweepOptions opt;
  opt.spectral = cfg.spectral;
  opt.sphere_closed_form = cfg.closed_form_norms;
  if (opt.sphere_closed_form && cfg.profile_kind != "round_sphere")
    fail(ErrorKind::ConfigError, "converge.norms = closed_form needs profile.kind = round_sphere");
  const ConvergenceReport rep = convergence_sweep(p, ev, cfg.ells, sym, opt);

  json records = json::array();
  io::CsvTable csv;
  csv.header = {"ell", "M_ell", "M_ell_over_ell", "ks_mu", "w1_mu", "ks_nu", "w1_nu"};
  bool any_failed = false;
  for (const auto& row : rep.rows) {
    json rec = {{"ell", row.ell}};
    if (row.error) {
      any_failed = true;
      rec["error"] = *row.error;
      records.push_back(rec);
      log << "ell " << row.ell << ": " << *row.error << "\n";
      continue;
    }
    rec["M_ell"] = row.M_ell;
    rec["M_ell_over_ell"] = row.M_ell_over_ell;
    rec["ks_mu"] = row.ks_mu;
    rec["w1_mu"] = row.w1_mu;
    rec["ks_nu"] = optional_number(row.ks_nu);
    rec["w1_nu"] = optional_number(row.w1_nu);
    if (sym) rec["nu_signed"] = row.nu_signed;
    records.push_back(rec);
    const double nan = std::nan("");
    csv.rows.push_back({static_cast<double>(row.ell), row.M_ell, row.M_ell_over_ell, row.ks_mu, row.w1_mu,
                        row.ks_nu.value_or(nan), row.w1_nu.value_or(nan)});
  }
  json doc = {{"profile", rep.profile},
              {"ells", rep.ells},
              {"symbol", sym ? json(std::string(to_string(sym->kind))) : json(nullptr)},
              {"records", records},
              {"fit", {{"w1_exponent", rep.fit.exponent}, {"w1_r2", rep.fit.r2}, {"points", rep.fit.points}}},
              {"fit_even",
               {{"w1_exponent", rep.fit_even.exponent}, {"w1_r2", rep.fit_even.r2}, {"points", rep.fit_even.points}}}};
  io::write_atomic(out_path(cfg, "converge.json"), doc.dump(2) + "\n");
  io::write_atomic(out_path(cfg, "converge.csv"), io::to_csv(csv));
  log << "W1(mu) ~ ell^" << rep.fit.exponent << " (r2 " << rep.fit.r2 << ")\n";
  return any_failed ? kNumericalFailure : kSuccess;
}

struct VerifyCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// Closed-form oracle suite on the round sphere.  A check that throws fails
/// with the error recorded in `detail`.
inline std::vector<VerifyCheck> verify_sphere_checks(const RunConfig& cfg) {
  const SurfaceProfile p = make_round_sphere();
  const ActionEvaluator ev(p, cfg.actions);
  std::vector<VerifyCheck> out;
  auto run = [&](std::string name, double tol, const std::function<double()>& residual) {
    VerifyCheck c{std::move(name), std::nan(""), tol, false, {}};
    try {
      c.residual = residual();
      c.passed = c.residual <= tol;
    } catch (const std::exception& e) {
      c.detail = e.what();
    }
    out.push_back(std::move(c));
  };

  run("action_identity", 1e-10, [&] {
    std::vector<double> ratios{0.0, 0.99, -0.99};
    for (int k = 1; k <= 9; ++k) ratios.insert(ratios.end(), {0.1 * k, -0.1 * k});
    double worst = 0.0;
    for (double E : {0.5, 1.0, 3.0})
      for (double q : ratios) worst = std::max(worst, std::abs(ev.action(q * E, E) - E));
    return worst;
  });
  run("density_closed_form", 1e-8, [&] {
    double worst = 0.0;
    for (int k = 0; k <= 400; ++k) {
      const double c = -0.999 + 1.998 * k / 400;
      worst = std::max(worst, std::abs(ev.limit_density_unnorm(c) * std::sqrt(1.0 - c * c) - 1.0));
    }
    return worst;
  });
  run("normalization_pi", 1e-8, [&] { return std::abs(ev.normalization() - std::numbers::pi); });
  run("cdf_arcsine", 1e-8, [&] {
    double worst = 0.0;
    for (int k = 0; k <= 400; ++k) {
      const double c = -1.0 + 2.0 * k / 400;
      worst = std::max(worst, std::abs(ev.limit_cdf(c) - (std::asin(c) / std::numbers::pi + 0.5)));
    }
    return worst;
  });
  run("derivative_identity", 1e-6, [&] {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double c = -0.95 + 1.9 * k / 19;
      const auto d = ev.equator_rho_derivative(c);
      worst = std::max(worst, std::abs(d.finite_difference - d.predicted) / std::abs(d.predicted));
    }
    return worst;
  });

  constexpr int kMaxEll = 20;
  std::vector<std::vector<RadialMode>> modes;
  std::string solve_error;
  try {
    modes.resize(kMaxEll + 1);
    parallel_for(modes.size(), [&](std::size_t m) {
      modes[m] = radial_modes(p, static_cast<int>(m), kMaxEll - static_cast<int>(m), cfg.spectral);
    });
  } catch (const std::exception& e) {
    solve_error = e.what();
  }
  auto over_modes = [&](const std::function<double(const RadialMode&)>& f) {
    if (!solve_error.empty()) throw std::runtime_error(solve_error);
    double worst = 0.0;
    for (const auto& row : modes)
      for (const auto& mode : row) worst = std::max(worst, f(mode));
    return worst;
  };
  run("eigenvalues_ell_ell_plus_1", 1e-6, [&] {
    return over_modes([](const RadialMode& mode) {
      const double exact = mode.ell * (mode.ell + 1.0);
      return std::abs(mode.lambda_sq - exact) / std::max(exact, 1.0);
    });
  });
  run("legendre_restricted_norms", 1e-5, [&] {
    return over_modes([&](const RadialMode& mode) {
      return std::abs(restricted_norm(mode, p) - sphere_restricted_norm(mode.ell, mode.m));
    });
  });
  return out;
}

inline int cmd_verify_sphere(const RunConfig& cfg, std::ostream& log) {
  const auto checks = verify_sphere_checks(cfg);
  bool all = true;
  json arr = json::array();
  for (const auto& c : checks) {
    all = all && c.passed;
    json entry = {{"name", c.name}, {"passed", c.passed}, {"residual", std::isnan(c.residual) ? json(nullptr) : json(c.residual)},
                  {"tolerance", c.tolerance}};
    if (!c.detail.empty()) entry["detail"] = c.detail;
    arr.push_back(entry);
    log << (c.passed ? "PASS " : "FAIL ") << c.name << " residual=" << io::format_double(c.residual)
        << " tol=" << c.tolerance << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
  }
  json doc = {{"profile", "round_sphere"}, {"grid_size", cfg.spectral.grid_size}, {"passed", all}, {"checks", arr}};
  io::write_atomic(out_path(cfg, "verify.json"), doc.dump(2) + "\n");
  return all ? kSuccess : kVerificationFailure;
}

/// Dispatches cfg.command and maps failures to exit codes.
inline int run(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    if (cfg.command.empty()) fail(ErrorKind::ConfigError, "no command given (run.command or --command)");
    if (cfg.command == "validate") return cmd_validate(cfg, log);
    if (cfg.command == "density") return cmd_density(cfg, log);
    if (cfg.command == "spectrum") return cmd_spectrum(cfg, log);
    if (cfg.command == "converge") return cmd_converge(cfg, log);
    if (cfg.command == "verify-sphere") return cmd_verify_sphere(cfg, log);
    fail(ErrorKind::ConfigError, "unknown command '" + cfg.command + "'");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace revtone::cli
