#pragma once

// Experiment orchestration behind the command-line front end: JSON config
// ingestion, scenario execution (single solves, rho- and beta-sweeps,
// audits, constants, bubbles, refinement studies), and deterministic CSV /
// SVG / text artifact emission.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nls/nonlinearity.hpp"
#include "nls/rearrange.hpp"
#include "nls/solver.hpp"

namespace nls {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// process exit codes shared with the CLI
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitAuditFailure = 3;
inline constexpr int kExitNoConvergence = 4;
inline constexpr int kExitIoFailure = 5;

struct ExperimentConfig {
  int version = 1;
  std::string scenario;
  int components = 1;
  int dimension = 3;
  double r_max = 20.0;
  std::size_t nodes = 2000;
  std::vector<NonlinearityTerm> terms;
  SolveConfig solve;

  std::vector<std::vector<double>> rho_values;  // sweep-rho axis
  std::vector<double> beta_values;              // sweep-beta axis
  std::vector<double> epsilons;                 // bubbles axis
  std::vector<double> gn_exponents;             // gn scenario
  int refine_levels = 3;

  std::string output_dir = "out";
  bool force = false;
  int threads = 1;
};

// Parses and validates the whole document; throws ConfigError without
// touching the filesystem on any defect.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

struct GroundEnergyRow {
  std::vector<double> rho;
  double c = 0.0;
  std::vector<double> lambda;
  std::vector<int> saturation;  // 1 saturated, 0 interior, -1 zero component
  bool converged = false;
  std::string status;
};

struct GroundEnergyMap {
  std::vector<GroundEnergyRow> rows;
};

// Concurrent map computation; per-row seeds derive from the master seed and
// the rho content, so duplicated rows reproduce bit-identically and results
// do not depend on the thread count.
GroundEnergyMap sweep_rho(const NonlinearitySpec& spec, const GridPtr& grid,
                          const SolveConfig& base,
                          const std::vector<std::vector<double>>& rho_grid,
                          int threads);

// Rearrangement certificate as CSV rows (one row per component plus one per
// coupling term and a trailer with the manifold and energy bookkeeping).
std::string rearrangement_certificate_csv(const RearrangementCertificate& cert);

// Executes the configured scenario, writing artifacts under
// config.output_dir. Returns a process exit code.
int run_experiment(const ExperimentConfig& config);

}  // namespace nls
