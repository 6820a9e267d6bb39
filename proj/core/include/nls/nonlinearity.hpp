#pragma once

// Composable nonlinearities G(u) for coupled Schrodinger systems, together
// with g = grad G, H(u) = <g(u),u> - 2 G(u) and h = grad H, all in closed
// form per term. The critical part (1/2^*) sum_j theta_j |u_j|^{2^*} is kept
// separate from the subcritical part G_tilde throughout.

#include <span>
#include <variant>
#include <vector>

#include "nls/radial.hpp"

namespace nls {

// (mu/p) |u_i|^p on one component, 2 < p < 2^*.
// p == 2^* is rejected here; critical powers go through SobolevCritical.
struct SeparablePower {
  int component = 0;
  double mu = 0.0;
  double exponent = 0.0;
};

// (mu/p) |u_i|^p ln(1 + |u_i|), p in [2_N, 2^* - 1].
struct LogPower {
  int component = 0;
  double mu = 0.0;
  double exponent = 0.0;
};

// beta * prod_i |u_i|^{r_i}; every r_i is 0 or > 1, at least two are > 1,
// and 2_N <= sum_i r_i < 2^*.
struct CouplingProduct {
  double beta = 0.0;
  std::vector<double> exponents;
};

// (1/2^*) sum_j theta_j |u_j|^{2^*}; theta is all zero or all positive.
struct SobolevCritical {
  std::vector<double> theta;
};

using NonlinearityTerm =
    std::variant<SeparablePower, LogPower, CouplingProduct, SobolevCritical>;

class NonlinearitySpec {
 public:
  // Validates every term against the windows above; throws
  // std::invalid_argument on violation.
  NonlinearitySpec(int dimension, int num_components,
                   std::vector<NonlinearityTerm> terms);

  int dimension() const { return dimension_; }
  int num_components() const { return num_components_; }
  const std::vector<NonlinearityTerm>& terms() const { return terms_; }

  double l2_critical_exponent() const { return two_n_; }       // 2_N = 2 + 4/N
  double sobolev_critical_exponent() const { return two_star_; }  // 2N/(N-2)

  // aggregate critical weights; all zero when no critical term is present
  const std::vector<double>& theta() const { return theta_; }
  bool has_critical_part() const { return has_critical_; }

  // separable even G_i plus admissible coupling products
  bool is_gsp_form() const { return is_gsp_form_; }

  // Pointwise evaluation at u in R^K. Non-finite inputs are rejected.
  double eval_G(std::span<const double> u) const;
  double eval_H(std::span<const double> u) const;
  void eval_g(std::span<const double> u, std::span<double> out) const;
  void eval_h(std::span<const double> u, std::span<double> out) const;

  // Subcritical part only (terms other than SobolevCritical).
  double eval_G_tilde(std::span<const double> u) const;
  double eval_H_tilde(std::span<const double> u) const;
  void eval_g_tilde(std::span<const double> u, std::span<double> out) const;
  void eval_h_tilde(std::span<const double> u, std::span<double> out) const;

 private:
  int dimension_;
  int num_components_;
  double two_n_;
  double two_star_;
  std::vector<NonlinearityTerm> terms_;
  std::vector<double> theta_;
  bool has_critical_ = false;
  bool is_gsp_form_ = true;
};

// Quadratures of the pointwise maps over a state on its grid.
double integral_G(const NonlinearitySpec& spec, const StateVector& u);
double integral_H(const NonlinearitySpec& spec, const StateVector& u);
// integral of <g(u), u>
double integral_gu(const NonlinearitySpec& spec, const StateVector& u);
// integral of dG/du_i * u_i for one component
double integral_gi_ui(const NonlinearitySpec& spec, const StateVector& u, int i);

}  // namespace nls
