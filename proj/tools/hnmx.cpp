// hnmx: weight tables, complete-monotonicity sweeps, kernel samples,
// convergence studies and energy traces for the HN Maxwell solver.

#include "hnmx/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"hnmx: CQ weights, monotonicity sweeps and Havriliak-Negami Maxwell runs"};
  app.set_help_all_flag("--help-all");

  std::string experiment;
  std::string config_file;
  std::map<std::string, std::string> flags;
  bool check = false;

  app.add_option("experiment", experiment, "weights | cm-check | kernel | convergence | energy")
      ->required()
      ->check(CLI::IsMember({"weights", "cm-check", "kernel", "convergence", "energy"}));
  app.add_option("--config", config_file, "flat key=value config file (flags override it)");

  // flag name -> config key
  const std::pair<const char*, const char*> string_flags[] = {
      {"--alpha", "alpha"},         {"--beta", "beta"},         {"--tau", "tau"},
      {"--nx", "nx"},               {"--ny", "ny"},             {"--T", "T"},
      {"--J", "J"},                 {"--kmax", "kmax"},         {"--scheme", "scheme"},
      {"--out", "out"},             {"--threads", "threads"},   {"--grid-step", "grid_step"},
      {"--tol", "tol"},             {"--mode", "mode"},         {"--tau-ref", "tau_ref"},
      {"--eps-inf", "eps_inf"},     {"--delta-eps", "delta_eps"}, {"--t-min", "t_min"},
      {"--t-max", "t_max"},         {"--points", "points"},
  };
  std::map<std::string, std::string> raw;
  for (const auto& [flag, key] : string_flags)
    app.add_option(flag, raw[key], std::string("override '") + key + "' (lists: comma separated)");
  app.add_flag("--check", check, "evaluate the experiment's pass/fail criteria; exit 1 on failure");

  CLI11_PARSE(app, argc, argv);

  try {
    hnmx::ConfigMap cfg;
    if (!config_file.empty())
      cfg = hnmx::parse_config_file(config_file);
    cfg["experiment"] = experiment;
    for (const auto& [key, value] : raw)
      if (!value.empty())
        cfg[key] = value;
    if (check)
      cfg["check"] = "true";
    if (!cfg.count("out"))
      if (const char* env = std::getenv("HNMX_OUT"); env && *env)
        cfg["out"] = env;

    const auto config = hnmx::make_config(cfg);
    const auto result = hnmx::run(config);
    for (const auto& f : result.files)
      std::cout << "wrote " << f.string() << '\n';
    for (const auto& c : result.checks)
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name
                << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
    return result.all_passed() ? 0 : 1;
  } catch (const hnmx::ConfigError& e) {
    std::cerr << "hnmx: invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const hnmx::NumericalError& e) {
    std::cerr << "hnmx: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "hnmx: " << e.what() << '\n';
    return 3;
  }
}
