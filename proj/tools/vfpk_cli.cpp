#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "vfpk/config.hpp"
#include "vfpk/errors.hpp"
#include "vfpk/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Vlasov-Fokker-Planck numerical laboratory"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  long long seed = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized checks (overrides seed)");
  app.add_flag("--quiet", quiet, "suppress progress output");
  app.fallthrough();

  using Runner = int (*)(const vfpk::RunConfig&, const vfpk::RunOptions&);
  const std::map<std::string, std::pair<Runner, const char*>> commands{
      {"steady", {vfpk::run_steady, "solve the steady-state fixed point"}},
      {"evolve", {vfpk::run_evolve, "nonlinear kinetic evolution"}},
      {"linear", {vfpk::run_linear, "evolution linearized around the steady state"}},
      {"diagnose", {vfpk::run_diagnose, "dense operator-identity verification"}},
      {"poincare", {vfpk::run_poincare, "Witten and steady-measure spectral gaps"}},
      {"sweep", {vfpk::run_sweep, "Cartesian parameter sweep with a manifest"}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.second);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vfpk::kExitConfig;
  }

  try {
    vfpk::RunConfig cfg = vfpk::load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed_opt->count()) cfg.seed = seed;
    vfpk::RunOptions opt;
    opt.quiet = quiet;
    opt.threads = vfpk::threads_from_env();
    const std::string name = app.get_subcommands().front()->get_name();
    return commands.at(name).first(cfg, opt);
  } catch (const vfpk::ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return vfpk::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return vfpk::exit_code_for(e);
  }
}
