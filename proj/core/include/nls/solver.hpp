#pragma once

// Minimization of J over the manifold {M = 0} intersected with the product
// of L^2 balls |u_i|_2 <= rho_i. One iteration: H^1-preconditioned descent
// step on J, ball projection (rescale any component over budget), optional
// rearrangement descent, projection back onto the manifold by dilation.
// Multi-start over a family of Gaussian initial states; the lowest energy
// wins. Lagrange multipliers come from the per-component Nehari identity
// and the KKT report records their sign structure.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nls/analysis.hpp"
#include "nls/audit.hpp"
#include "nls/nonlinearity.hpp"
#include "nls/radial.hpp"
#include "nls/variational.hpp"

namespace nls {

struct SolveConfig {
  std::vector<double> rho;  // K positive mass-budget radii (|u_i|_2^2 <= rho_i^2)
  int max_iters = 2000;
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  double armijo_c1 = 1e-4;
  double projected_grad_tol = 1e-7;
  int rearrangement_every = 0;  // 0 = off
  int multi_start = 8;
  std::vector<double> init_widths = {1.0, 2.0, 4.0, 0.5};
  std::vector<double> init_amplitudes = {1.0};
  std::uint64_t seed = 12345;
  bool skip_audit = false;  // audit/eta2 gate bypass (CLI --force)
  bool keep_iteration_log = true;
};

enum class Saturation { saturated, interior, zero };

struct KktReport {
  double min_lambda = 0.0;
  double max_slack = 0.0;  // max_i lambda_i (rho_i^2 - |u_i|_2^2)
  double sigma = 0.0;
  bool lambda_nonnegative = false;  // min_lambda >= -1e-6
  bool slack_small = false;         // max_slack < 1e-6
  bool sigma_small = false;         // |sigma| < 1e-4

  bool ok() const { return lambda_nonnegative && slack_small && sigma_small; }
};

struct IterationRecord {
  int iteration = 0;
  double energy = 0.0;
  double manifold_residual = 0.0;  // |M|/|grad u|^2
  double projected_grad = 0.0;
  double step = 0.0;
};

struct SolutionReport {
  StateVector state;
  bool converged = false;
  std::string status;

  double energy = 0.0;          // c = J(u)
  std::vector<double> masses;   // |u_i|_2^2
  std::vector<double> lambda;   // NaN on zero components
  double sigma_m = 0.0;
  IdentityResiduals identity;
  std::vector<Saturation> saturation;
  KktReport kkt;

  double projected_grad_norm = 0.0;
  int iterations = 0;
  int winning_start = -1;
  std::vector<IterationRecord> log;

  bool audit_passed = true;
  std::string audit_summary;
  bool eta2_ok = true;
  std::optional<ThresholdReport> threshold;
};

SolutionReport minimize(const NonlinearitySpec& spec, const GridPtr& grid,
                        const SolveConfig& config);

struct MultiplierExtraction {
  std::vector<double> lambda;  // NaN on components with mass < 1e-12
  double sigma_m = 0.0;
  KktReport kkt;
  bool ill_conditioned = false;
};

// lambda_i |u_i|_2^2 = int dG/du_i u_i - |grad u_i|_2^2 per component;
// sigma by a closed-form 1-D least-squares fit of the stationarity residual
// over the sigma-parameterized equation family.
MultiplierExtraction extract_multipliers(const StateVector& u,
                                         const NonlinearitySpec& spec,
                                         std::span<const double> rho);

struct BetaSweepRow {
  double beta = 0.0;
  SolutionReport report;
  double a_beta = 0.0;           // fiber root of the reference pair state
  double bounded_product = 0.0;  // beta * a_beta^{N(r1+r2-2)/2 - 2}
};

// K = 2, single coupling term: re-solve for each beta and record the
// boundedness diagnostic built on the scalar minimizer of the second
// component's equation. Throws unless the template spec has exactly one
// coupling term and K = 2.
std::vector<BetaSweepRow> beta_sweep(const NonlinearitySpec& spec_template,
                                     std::span<const double> beta_values,
                                     const GridPtr& grid,
                                     const SolveConfig& config);

}  // namespace nls
