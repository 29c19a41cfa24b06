#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "revtone/commands.hpp"
#include "revtone/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Equator-restriction statistics on convex surfaces of revolution"};
  std::string config_path, out_dir, command;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Run configuration (section.key = value lines)");
  app.add_option("--out", out_dir, "Output directory, overrides run.out_dir");
  app.add_option("--command", command, "validate | density | spectrum | converge | verify-sphere");
  app.add_option("--set", overrides, "Extra section.key=value assignments, applied after the file");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : revtone::cli::kConfigError;
  }

  revtone::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = revtone::load_config(config_path);
    for (std::size_t i = 0; i < overrides.size(); ++i) {
      const std::string& kv = overrides[i];
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        revtone::fail(revtone::ErrorKind::ConfigError, "--set expects key=value, got '" + kv + "'");
      revtone::apply_setting(cfg, revtone::detail::trim(std::string_view(kv).substr(0, eq)),
                             revtone::detail::trim(std::string_view(kv).substr(eq + 1)), "--set",
                             static_cast<int>(i + 1), 1, eq + 2);
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!command.empty()) revtone::apply_setting(cfg, "run.command", command, "--command");
  } catch (const revtone::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return revtone::cli::kConfigError;
  }
  return revtone::cli::run(cfg, std::cout, std::cerr);
}
