#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "revtone/actions.hpp"
#include "revtone/error.hpp"
#include "revtone/expr.hpp"
#include "revtone/interp.hpp"
#include "revtone/spectral.hpp"

namespace revtone {

/// Flat `section.key = value` run configuration.
struct RunConfig {
  std::string profile_kind = "round_sphere";
  double aspect = 1.3;
  std::string table_path;

  ActionEvaluator::Options actions;
  SpectralOptions spectral;
  std::string interp = "cubic";

  std::string command;
  std::vector<int> ells;
  std::string out_dir = ".";

  std::string symbol_kind = "none";
  std::string symbol_expr;
  std::string symbol_table;
  int symbol_expr_line = 0;
  std::size_t symbol_expr_column = 0;

  int density_points = 2000;
  bool closed_form_norms = false;
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> cmds{"validate", "density", "spectrum", "converge", "verify-sphere"};
  return cmds;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Range or syntax problem with a value; the caller attaches line and column.
struct ValueError {
  std::string what;
};

inline long long to_int(std::string_view v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ValueError{"expected an integer, got '" + std::string(v) + "'"};
  return out;
}

inline double to_double(std::string_view v) {
  const std::string s(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValueError{"expected a number, got '" + s + "'"};
  }
  if (used != s.size() || !std::isfinite(out)) throw ValueError{"expected a number, got '" + s + "'"};
  return out;
}

inline bool to_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValueError{"expected true or false, got '" + std::string(v) + "'"};
}

inline long long int_in(std::string_view v, long long lo, long long hi) {
  const long long x = to_int(v);
  if (x < lo || x > hi)
    throw ValueError{"value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"};
  return x;
}

inline double positive_below(std::string_view v, double hi) {
  const double x = to_double(v);
  if (!(x > 0.0) || !(x < hi)) {
    std::ostringstream os;
    os << "value " << x << " outside (0, " << hi << ")";
    throw ValueError{os.str()};
  }
  return x;
}

inline std::string one_of(std::string_view v, std::initializer_list<std::string_view> allowed) {
  for (auto a : allowed)
    if (v == a) return std::string(v);
  std::string list;
  for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw ValueError{"'" + std::string(v) + "' is not one of {" + list + "}"};
}

inline std::vector<int> int_list(std::string_view v) {
  std::vector<int> out;
  std::string s(v);
  for (char& ch : s)
    if (ch == ',') ch = ' ';
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(static_cast<int>(int_in(tok, 1, 100000)));
  return out;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

inline const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table{
      {"profile.kind",
       [](RunConfig& c, std::string_view v) { c.profile_kind = one_of(v, {"round_sphere", "ellipsoid", "custom_table"}); }},
      {"profile.aspect", [](RunConfig& c, std::string_view v) { c.aspect = positive_below(v, 1e3); }},
      {"profile.table_path", [](RunConfig& c, std::string_view v) { c.table_path = std::string(v); }},
      {"actions.quad_nodes", [](RunConfig& c, std::string_view v) { c.actions.quad_nodes = int_in(v, 64, 1 << 16); }},
      {"actions.fd_step", [](RunConfig& c, std::string_view v) { c.actions.fd_step = positive_below(v, 1e-2); }},
      {"actions.newton_tol", [](RunConfig& c, std::string_view v) { c.actions.newton_tol = positive_below(v, 1e-6); }},
      {"actions.cdf_nodes", [](RunConfig& c, std::string_view v) { c.actions.cdf_nodes = int_in(v, 8, 4096); }},
      {"spectral.grid_size", [](RunConfig& c, std::string_view v) { c.spectral.grid_size = int_in(v, 16, 2000000); }},
      {"spectral.interp", [](RunConfig& c, std::string_view v) { c.interp = one_of(v, {"cubic"}); }},
      {"spectral.richardson", [](RunConfig& c, std::string_view v) { c.spectral.richardson = to_bool(v); }},
      {"run.command",
       [](RunConfig& c, std::string_view v) {
         c.command = one_of(v, {"validate", "density", "spectrum", "converge", "verify-sphere"});
       }},
      {"run.ells", [](RunConfig& c, std::string_view v) { c.ells = int_list(v); }},
      {"run.out_dir", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); }},
      {"symbol.kind",
       [](RunConfig& c, std::string_view v) { c.symbol_kind = one_of(v, {"none", "radial_mult", "angular_ratio"}); }},
      {"symbol.expr", [](RunConfig& c, std::string_view v) { c.symbol_expr = std::string(v); }},
      {"symbol.table_path", [](RunConfig& c, std::string_view v) { c.symbol_table = std::string(v); }},
      {"density.points", [](RunConfig& c, std::string_view v) { c.density_points = int_in(v, 4, 10000000); }},
      {"converge.norms",
       [](RunConfig& c, std::string_view v) { c.closed_form_norms = one_of(v, {"solver", "closed_form"}) == "closed_form"; }},
  };
  return table;
}

inline std::string where(const std::string& source, int line, std::size_t column) {
  return source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": ";
}

}  // namespace detail

/// Applies one `key = value` assignment; `line`/`column` locate it for diagnostics.
inline void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value, const std::string& source = "<args>",
                          int line = 0, std::size_t key_column = 1, std::size_t value_column = 1) {
  const auto& table = detail::setters();
  const auto it = table.find(key);
  if (it == table.end())
    fail(ErrorKind::ConfigError, detail::where(source, line, key_column) + "unknown key '" + std::string(key) + "'");
  try {
    it->second(cfg, value);
  } catch (const detail::ValueError& e) {
    fail(ErrorKind::ConfigError, detail::where(source, line, value_column) + std::string(key) + ": " + e.what);
  }
  if (key == "symbol.expr") {
    cfg.symbol_expr_line = line;
    cfg.symbol_expr_column = value_column;
  }
}

inline RunConfig parse_config(std::string_view text, const std::string& source = "<config>") {
  RunConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    if (detail::trim(raw).empty()) continue;
    const auto eq = raw.find('=');
    const std::size_t key_col = raw.find_first_not_of(" \t") + 1;
    if (eq == std::string_view::npos)
      fail(ErrorKind::ConfigError, detail::where(source, line_no, key_col) + "expected 'section.key = value'");
    const std::string_view key = detail::trim(raw.substr(0, eq));
    const std::string_view value = detail::trim(raw.substr(eq + 1));
    std::size_t value_col = eq + 2;
    while (value_col <= raw.size() && (raw[value_col - 1] == ' ' || raw[value_col - 1] == '\t')) ++value_col;
    if (value.empty()) fail(ErrorKind::ConfigError, detail::where(source, line_no, value_col) + "missing value");
    apply_setting(cfg, key, value, source, line_no, key_col, value_col);
    if (pos > text.size()) break;
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigError, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

/// The configured symbol, or nothing when symbol.kind = none.
inline std::optional<SymbolFn> build_symbol(const RunConfig& cfg) {
  if (cfg.symbol_kind == "none") return std::nullopt;
  const bool radial = cfg.symbol_kind == "radial_mult";
  RealFn fn;
  if (!cfg.symbol_expr.empty() && !cfg.symbol_table.empty())
    fail(ErrorKind::ConfigError, "give either symbol.expr or symbol.table_path, not both");
  if (!cfg.symbol_expr.empty()) {
    try {
      fn = expr::parse(cfg.symbol_expr, radial ? 'r' : 's');
    } catch (const expr::ParseError& e) {
      fail(ErrorKind::ConfigError, "symbol.expr line " + std::to_string(cfg.symbol_expr_line) + ", column " +
                                       std::to_string(cfg.symbol_expr_column + e.column() - 1) + ": " + e.message());
    }
  } else if (!cfg.symbol_table.empty()) {
    std::ifstream in(cfg.symbol_table);
    if (!in) fail(ErrorKind::ConfigError, "cannot open symbol table '" + cfg.symbol_table + "'");
    std::vector<double> x, y;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      for (char& ch : line)
        if (ch == ',') ch = ' ';
      if (detail::trim(line).empty()) continue;
      ++row;
      std::istringstream fields(line);
      double a = 0, b = 0;
      if (!(fields >> a >> b)) fail(ErrorKind::ConfigError, "symbol table row " + std::to_string(row) + ": expected two numbers");
      if (!x.empty() && !(a > x.back()))
        fail(ErrorKind::ConfigError, "symbol table row " + std::to_string(row) + ": abscissa is not strictly increasing");
      x.push_back(a);
      y.push_back(b);
    }
    if (x.size() < 3) fail(ErrorKind::ConfigError, "symbol table needs at least 3 rows");
    const std::size_t n = x.size();
    const double s0 = (y[1] - y[0]) / (x[1] - x[0]), s1 = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    auto spline = std::make_shared<const interp::ClampedSpline>(x, y, s0, s1);
    fn = [spline](double v) { return spline->value(v); };
  } else {
    fail(ErrorKind::ConfigError, "symbol.kind = " + cfg.symbol_kind + " needs symbol.expr or symbol.table_path");
  }
  return radial ? SymbolFn::radial_mult(std::move(fn)) : SymbolFn::angular_ratio(std::move(fn));
}

}  // namespace revtone
