#pragma once

// Energy J(u) = 1/2 |grad u|_2^2 - int G(u), the dilation-derived constraint
// M(u) = |grad u|_2^2 - N/2 int H(u), the mass-preserving dilation
// (s * u)(x) = s^{N/2} u(sx), the fiber map s -> J(s * u), and the
// projection of a state onto the manifold {M = 0}.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nls/nonlinearity.hpp"
#include "nls/radial.hpp"

namespace nls {

double energy_J(const StateVector& u, const NonlinearitySpec& spec);

// Throws std::invalid_argument on the zero state (M is defined on nonzero
// states only).
double constraint_M(const StateVector& u, const NonlinearitySpec& spec);

// int |u(x)|^p dx with |.| the Euclidean norm across components.
double integral_vector_abs_pow(const StateVector& u, double p);

// (s * u)(r) = s^{N/2} u(s r), resampled on the shared grid by monotone
// cubic (Fritsch-Carlson) interpolation; queries beyond r_max give 0.
StateVector dilate(const StateVector& u, double s);
RadialField dilate(const RadialField& u, double s);

// Spatial-argument-only rescale u(R r) (no amplitude factor).
StateVector argument_scale(const StateVector& u, double r_scale);

// The radius R_u = sqrt( N int H(u) / (2 |grad u|_2^2) ); u(R_u .) lands on
// the manifold. Requires int H(u) > 0.
double manifold_radius(const StateVector& u, const NonlinearitySpec& spec);

// Change-of-variables evaluation of the fiber map: no interpolation, only
// pointwise rescaling of the node values.
//   phi(s)   = s^2/2 |grad u|^2 - s^{-N} int G(s^{N/2} u)
//   M(s * u) = s^2 |grad u|^2 - N/2 s^{-N} int H(s^{N/2} u)
class FiberEvaluator {
 public:
  FiberEvaluator(const StateVector& u, const NonlinearitySpec& spec);
  // caller-supplied gradient energy (e.g. an alternative discretization)
  FiberEvaluator(const StateVector& u, const NonlinearitySpec& spec,
                 double grad_sq);

  double phi(double s) const;
  double constraint(double s) const;
  // constraint value and its s-derivative in one pass
  void constraint_with_derivative(double s, double& value, double& derivative) const;
  double grad_norm_sq() const { return grad_sq_; }

 private:
  double integral_pointwise(double s, bool want_h) const;

  const StateVector* u_;
  const NonlinearitySpec* spec_;
  double grad_sq_;
};

// Root of s -> M(s * u) on the analytic fiber map (no resampling), found by
// safeguarded Newton inside a sign-change bracket grown from s_guess.
// Throws FiberProjectionError when no sign change exists in [1e-6, 1e+6].
double fiber_root(const FiberEvaluator& fib, int dimension, double s_guess = 1.0);

struct FiberScan {
  std::vector<double> s;
  std::vector<double> phi;
  std::vector<double> constraint;
  double maximizer_lo = 0.0;  // a(u): first scan maximizer of phi
  double maximizer_hi = 0.0;  // b(u): last scan maximizer of phi
  bool plateau = false;       // b > a beyond scan resolution
  bool eta_precondition_ok = true;
  double eta_used = 0.0;
  double eta_bound = 0.0;  // |grad u|^2 / (2 |u|_{2_N}^{2_N})
};

FiberScan fiber_scan(const StateVector& u, const NonlinearitySpec& spec,
                     double s_min = 1e-3, double s_max = 1e+3,
                     std::size_t count = 121,
                     double eta_estimate = 0.0);

struct FiberProjectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProjectionResult {
  StateVector state;   // dilate(u, s_star), satisfies |M| < 1e-10 relative
  double s_star = 1.0;
  bool eta_precondition_ok = true;
  double eta_bound = 0.0;
};

// Brackets the sign change of s -> M(s * u) (positive for small s, negative
// for large s), solves the analytic fiber map, then polishes the root on
// the resampled state so the returned field itself satisfies the manifold
// identity to 1e-10 relative (the default polish target leaves two orders
// of margin). Throws FiberProjectionError when no sign change exists in
// [1e-6, 1e+6].
ProjectionResult project_to_M(const StateVector& u, const NonlinearitySpec& spec,
                              double eta_estimate = 0.0, double s_guess = 1.0,
                              double polish_target = 1e-12);

struct IdentityResiduals {
  double nehari_res = 0.0;    // normalized by |grad u|_2^2
  double pohozaev_res = 0.0;  // normalized by |grad u|_2^2
  double M_value = 0.0;       // normalized by |grad u|_2^2
  double grad_norm_sq = 0.0;  // the normalization scale
};

IdentityResiduals residuals(const StateVector& u, std::span<const double> lambda,
                            const NonlinearitySpec& spec);

// Exact gradient of the discrete J with respect to the node values,
// component by component. The pinned boundary node gets 0.
std::vector<std::vector<double>> energy_gradient(const StateVector& u,
                                                 const NonlinearitySpec& spec);

}  // namespace nls
