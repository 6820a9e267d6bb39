#pragma once

// Discrete Schwarz (decreasing radial) rearrangement. A field is read as a
// step function taking value |v_k| on the annulus of measure w_k; the
// rearranged field lays those annuli around the origin in decreasing value
// order and is re-sampled at the grid's cumulative measures. Fields whose
// |values| are already radially nonincreasing are reproduced exactly, in
// particular the rearrangement is idempotent and kills sign structure.

#include <vector>

#include "nls/nonlinearity.hpp"
#include "nls/radial.hpp"
#include "nls/variational.hpp"

namespace nls {

RadialField schwarz(const RadialField& u);

struct RearrangementCertificate {
  // per component
  std::vector<double> mass_before, mass_after;
  std::vector<double> grad_before, grad_after;
  // L^p integrals |u_i|_p^p at the exponents below, per component
  std::vector<double> lp_exponents;
  std::vector<std::vector<double>> lp_before, lp_after;
  // per coupling term: int beta prod |u_i|^{r_i}
  std::vector<double> coupling_before, coupling_after;
  double m_before = 0.0, m_after = 0.0;
  double j_before = 0.0, j_after_projected = 0.0;
  double a = 1.0;  // fiber root of the rearranged state
};

struct RearrangementDescent {
  StateVector state;  // a * (u_1^*, ..., u_K^*), back on the manifold
  double a = 1.0;
  RearrangementCertificate certificate;
};

// Componentwise Schwarz rearrangement followed by the manifold projection.
// Requires a separable-plus-coupling nonlinearity (is_gsp_form);
// throws std::invalid_argument otherwise.
RearrangementDescent rearrangement_descent(const StateVector& u,
                                           const NonlinearitySpec& spec);

}  // namespace nls
