#include "nls/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nls {

RadialField schwarz(const RadialField& u) {
  const auto& grid = *u.grid;
  const std::size_t n = grid.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(u.values[a]) > std::abs(u.values[b]);
  });

  // cumulative measure of the sorted annuli
  std::vector<double> cum(n);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += grid.weights[order[j]];
    cum[j] = acc;
  }
  const double total = acc;
  const double tol = 1e-12 * total;

  // node k carries cumulative ball measure V_k = sum_{l<=k} w_l; assign the
  // sorted step-function value there (right-continuous inversion)
  std::vector<double> out(n);
  double v_k = 0.0;
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    v_k += grid.weights[k];
    while (j + 1 < n && cum[j] < v_k - tol) ++j;
    out[k] = std::abs(u.values[order[j]]);
  }
  return RadialField(u.grid, std::move(out));
}

RearrangementDescent rearrangement_descent(const StateVector& u,
                                           const NonlinearitySpec& spec) {
  if (!spec.is_gsp_form()) {
    throw std::invalid_argument(
        "rearrangement_descent: requires a separable+coupling nonlinearity");
  }

  const std::size_t k = u.num_components();
  std::vector<RadialField> rearranged;
  rearranged.reserve(k);
  for (const auto& f : u.components) rearranged.push_back(schwarz(f));
  StateVector star(std::move(rearranged));

  RearrangementCertificate cert;
  cert.lp_exponents = {2.0, spec.l2_critical_exponent(),
                       spec.sobolev_critical_exponent()};
  cert.lp_before.resize(k);
  cert.lp_after.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    cert.mass_before.push_back(mass(u.components[i]));
    cert.mass_after.push_back(mass(star.components[i]));
    cert.grad_before.push_back(grad_norm_sq(u.components[i]));
    cert.grad_after.push_back(grad_norm_sq(star.components[i]));
    for (double p : cert.lp_exponents) {
      cert.lp_before[i].push_back(std::pow(lp_norm(u.components[i], p), p));
      cert.lp_after[i].push_back(std::pow(lp_norm(star.components[i], p), p));
    }
  }

  for (const auto& term : spec.terms()) {
    if (const auto* cp = std::get_if<CouplingProduct>(&term)) {
      auto product_integral = [&](const StateVector& state) {
        const auto& grid = *state.grid();
        double acc = 0.0;
        for (std::size_t node = 0; node < grid.size(); ++node) {
          const double w = grid.weights[node];
          if (w == 0.0) continue;
          double p = cp->beta;
          for (std::size_t i = 0; i < cp->exponents.size(); ++i) {
            const double r = cp->exponents[i];
            if (r != 0.0) p *= std::pow(std::abs(state.components[i].values[node]), r);
          }
          acc += w * p;
        }
        return acc;
      };
      cert.coupling_before.push_back(product_integral(u));
      cert.coupling_after.push_back(product_integral(star));
    }
  }

  cert.m_before = constraint_M(u, spec);
  cert.m_after = constraint_M(star, spec);
  cert.j_before = energy_J(u, spec);

  auto projected = project_to_M(star, spec);
  cert.a = projected.s_star;
  cert.j_after_projected = energy_J(projected.state, spec);

  return RearrangementDescent{std::move(projected.state), cert.a, std::move(cert)};
}

}  // namespace nls
