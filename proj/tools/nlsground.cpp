// Command-line front end: ground states of coupled nonlinear Schrodinger
// systems under L^2 mass-ball constraints, plus the verification scenarios
// (assumption audits, sharp constants, bubble asymptotics, sweeps).

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nls/experiments.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  int threads = 0;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON experiment config")
      ->required();
  cmd->add_option("--out", flags.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", flags.seed, "master seed (overrides config)");
  cmd->add_option("--threads", flags.threads, "worker threads for sweeps")
      ->envname("NLS_GROUND_THREADS");
  cmd->add_flag("--force", flags.force, "run even when the assumption audit fails");
}

int run(const std::string& scenario, const CommonFlags& flags) {
  nls::ExperimentConfig cfg;
  try {
    cfg = nls::load_config(flags.config_path);
  } catch (const nls::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return nls::kExitConfigError;
  }
  if (cfg.scenario != scenario) {
    std::cerr << "config scenario '" << cfg.scenario
              << "' does not match subcommand '" << scenario << "'\n";
    return nls::kExitConfigError;
  }
  if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
  if (flags.seed >= 0) cfg.solve.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.threads > 0) cfg.threads = flags.threads;
  cfg.force = cfg.force || flags.force;

  try {
    const int rc = nls::run_experiment(cfg);
    if (rc == nls::kExitOk) {
      std::cout << "artifacts written to " << cfg.output_dir << "\n";
    } else {
      std::cerr << "scenario '" << scenario << "' finished with exit code " << rc
                << " (see " << cfg.output_dir << ")\n";
    }
    return rc;
  } catch (const nls::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return nls::kExitConfigError;
  } catch (const nls::IoError& e) {
    std::cerr << e.what() << "\n";
    return nls::kExitIoFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nlsground: normalized ground states of coupled NLS systems"};
  app.require_subcommand(1);

  const char* scenarios[] = {"solve",     "sweep-rho", "sweep-beta", "audit",
                             "gn",        "threshold", "bubbles",    "refine"};
  const char* descriptions[] = {
      "minimize the energy on the constraint manifold",
      "ground-state energy map over a grid of mass budgets",
      "coupling-strength sweep with saturation diagnostics",
      "numeric audit of the nonlinearity growth assumptions",
      "optimal Gagliardo-Nirenberg constants",
      "solve plus Sobolev-critical threshold comparison",
      "truncated-bubble asymptotics",
      "grid-refinement study"};

  CommonFlags flags[8];
  for (int i = 0; i < 8; ++i) {
    auto* cmd = app.add_subcommand(scenarios[i], descriptions[i]);
    add_common(cmd, flags[i]);
  }

  CLI11_PARSE(app, argc, argv);

  for (int i = 0; i < 8; ++i) {
    if (app.get_subcommand(scenarios[i])->parsed()) {
      return run(scenarios[i], flags[i]);
    }
  }
  return nls::kExitConfigError;
}
