// coevo command-line front end. Talks to the library only through coevo.h.
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "coevo/coevo.h"

namespace {

struct Common {
  std::string config_path;
  std::string out;
  uint64_t seed = 0;
  bool has_seed = false;
};

int report(coevo_status s) {
  if (s != COEVO_OK) std::fprintf(stderr, "coevo: %s: %s\n", coevo_status_name(s), coevo_last_error());
  return coevo_exit_code(s);
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration")->required();
  cmd->add_option("--out", c.out, "output directory (defaults to the config's \"output\")");
  cmd->add_option("--seed", c.seed, "override the config seed")
      ->each([&c](const std::string&) { c.has_seed = true; });
}

// Loads the config and applies overrides; returns nullptr after printing
// the error.
coevo_config* load(const Common& c, int& exit_code) {
  coevo_config* cfg = nullptr;
  coevo_status s = coevo_config_load(c.config_path.c_str(), &cfg);
  if (s == COEVO_OK && c.has_seed) s = coevo_config_set_seed(cfg, c.seed);
  if (s != COEVO_OK) {
    exit_code = report(s);
    coevo_config_free(cfg);
    return nullptr;
  }
  return cfg;
}

const char* out_arg(const Common& c) { return c.out.empty() ? nullptr : c.out.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  coevo_init_logging();

  CLI::App app{"Coevolution of links and strategies: ODE runs, learning runs, sweeps and analyses"};
  app.set_version_flag("--version", coevo_version());
  app.require_subcommand(1);

  Common run_opts, sweep_opts, analyze_opts, compare_opts;
  auto* run = app.add_subcommand("run", "integrate the configured system or run learning");
  add_common(run, run_opts);

  auto* sweep = app.add_subcommand("sweep", "one trajectory per grid value plus summary.csv");
  add_common(sweep, sweep_opts);
  std::string grid, param = "T";
  std::size_t jobs = 1;
  sweep->add_option("--grid", grid, "a:b:step or v1,v2,...")->required();
  sweep->add_option("--param", param, "T or epsilon")->check(CLI::IsMember({"T", "epsilon"}));
  sweep->add_option("--jobs", jobs, "concurrent grid points")->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "rest points and optional critical temperature");
  add_common(analyze, analyze_opts);
  bool critical = false;
  analyze->add_flag("--critical-temp", critical, "also bisect for the critical temperature");

  auto* compare = app.add_subcommand("compare", "learning trajectory against the replicator ODE");
  add_common(compare, compare_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  int exit_code = 0;
  coevo_status s = COEVO_OK;
  if (run->parsed()) {
    coevo_config* cfg = load(run_opts, exit_code);
    if (!cfg) return exit_code;
    s = coevo_run(cfg, out_arg(run_opts));
    coevo_config_free(cfg);
  } else if (sweep->parsed()) {
    coevo_config* cfg = load(sweep_opts, exit_code);
    if (!cfg) return exit_code;
    double* values = nullptr;
    std::size_t count = 0;
    s = coevo_parse_grid(grid.c_str(), &values, &count);
    if (s == COEVO_OK) s = coevo_sweep(cfg, param.c_str(), values, count, out_arg(sweep_opts), jobs);
    coevo_doubles_free(values);
    coevo_config_free(cfg);
  } else if (analyze->parsed()) {
    coevo_config* cfg = load(analyze_opts, exit_code);
    if (!cfg) return exit_code;
    s = coevo_analyze(cfg, out_arg(analyze_opts), critical ? 1 : 0);
    coevo_config_free(cfg);
  } else if (compare->parsed()) {
    coevo_config* cfg = load(compare_opts, exit_code);
    if (!cfg) return exit_code;
    s = coevo_compare(cfg, out_arg(compare_opts));
    coevo_config_free(cfg);
  }
  return report(s);
}
