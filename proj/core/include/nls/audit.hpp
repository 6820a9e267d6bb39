#pragma once

// Numeric auditing of the growth assumptions on the subcritical part
// G_tilde: boundedness of G_tilde/|u|^{2_N} at 0, superlinear growth at
// infinity, Sobolev subcriticality, the monotonicity inequality
// 2_N H_tilde <= <h_tilde(u), u> (with its strict-near-zero variant), and
// the two-sided comparison (4/N) G_tilde <= H_tilde <= (2^*-2) G_tilde.
//
// Everything here samples on log-spaced amplitude shells; the conditions
// are asymptotic, so verdicts carry margins and never claim proof.

#include <cstdint>
#include <optional>
#include <string>

#include "nls/nonlinearity.hpp"

namespace nls {

enum class AuditStatus { pass, fail, inconclusive };

struct AssumptionVerdict {
  AuditStatus status = AuditStatus::inconclusive;
  double margin = 0.0;
  std::string note;

  bool ok() const { return status == AuditStatus::pass; }
};

struct AuditOptions {
  double amplitude_min = 1e-6;
  double amplitude_max = 1e+6;
  int shells_per_decade = 4;
  int num_directions = 48;  // in addition to the +-e_i coordinate directions
  std::uint64_t seed = 9001;
};

struct AuditReport {
  AssumptionVerdict a0;         // growth bound on |h_tilde|
  AssumptionVerdict a1;         // eta < infinity
  AssumptionVerdict a2;         // growth of G_tilde at infinity
  AssumptionVerdict a3;         // G_tilde / |u|^{2^*} -> 0
  AssumptionVerdict a4;         // 2_N H_tilde <= <h_tilde, u>
  AssumptionVerdict a4_strict;  // strict somewhere near 0 when theta = 0
  AssumptionVerdict a5;         // (4/N) G_tilde <= H_tilde <= (2^*-2) G_tilde

  double eta = 0.0;      // max of G_tilde/|u|^{2_N} on the two smallest decades
  double c_tilde = 0.0;  // observed constant in |h_tilde| <= c (|u| + |u|^{2^*-1})

  bool passes_a1_to_a5() const;
  bool passes_all_with_strict() const;
  std::string summary() const;
};

AuditReport audit_assumptions(const NonlinearitySpec& spec,
                              const AuditOptions& options = {});

// Max of G_tilde/|u|^{2_N} over the two smallest amplitude decades
// (the limsup-at-zero estimator used for eta).
double estimate_eta(const NonlinearitySpec& spec, const AuditOptions& options = {});

struct Eta2Check {
  bool satisfied = false;
  double lhs = 0.0;     // 2^* C_{N,2_N}^{2_N} eta |rho|^{4/N}
  double margin = 0.0;  // 1 - lhs
  double eta = 0.0;
};

// Smallness condition 2^* C_{N,2_N}^{2_N} eta |rho|^{4/N} < 1. The eta
// estimate comes from the audit unless supplied by the caller;
// gn_constant_2n is the optimal Gagliardo-Nirenberg constant C_{N,2_N}.
Eta2Check check_eta2(const NonlinearitySpec& spec, std::span<const double> rho,
                     double gn_constant_2n,
                     std::optional<double> eta_override = {});

}  // namespace nls
