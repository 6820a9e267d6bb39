#pragma once

// Internal finite-difference building blocks shared by the solver and the
// constant computations: the exact gradient of the discrete Dirichlet
// energy, a tridiagonal SPD radial operator for preconditioning, and the
// Thomas solve.

#include <cstddef>
#include <vector>

#include "nls/radial.hpp"

namespace nls::detail {

// d/dv_j of sum_k w_k d_k(v)^2 where d is the centered/one-sided derivative
// used by grad_norm_sq. The last node is not a degree of freedom (pinned 0);
// its slot in the result is 0.
inline std::vector<double> dirichlet_energy_gradient(const RadialField& f) {
  const auto& grid = *f.grid;
  const auto& v = f.values;
  const double h = grid.spacing;
  const std::size_t m = v.size() - 1;
  const auto d = radial_derivative(f);
  std::vector<double> g(m + 1, 0.0);
  g[0] = -grid.weights[1] * d[1] / h;
  for (std::size_t j = 1; j + 1 < m; ++j) {
    g[j] = (grid.weights[j - 1] * d[j - 1] - grid.weights[j + 1] * d[j + 1]) / h;
  }
  if (m >= 2) {
    g[m - 1] = grid.weights[m - 2] * d[m - 2] / h - 2.0 * grid.weights[m] * d[m] / h;
  }
  return g;
}

struct Tridiagonal {
  std::vector<double> lower, diag, upper;

  // y = T x
  std::vector<double> apply(const std::vector<double>& x) const {
    const std::size_t n = diag.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = diag[i] * x[i];
      if (i > 0) v += lower[i] * x[i - 1];
      if (i + 1 < n) v += upper[i] * x[i + 1];
      y[i] = v;
    }
    return y;
  }

  // Thomas algorithm; rhs is overwritten with the solution.
  void solve(std::vector<double>& rhs) const {
    const std::size_t n = diag.size();
    std::vector<double> c(n), d(n);
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double denom = diag[i] - lower[i] * c[i - 1];
      c[i] = (i + 1 < n) ? upper[i] / denom : 0.0;
      d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    rhs[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = d[i] - c[i] * rhs[i + 1];
  }
};

// SPD operator K + mass_coeff * W on the free nodes 0..M-1 (node M carries
// the homogeneous boundary). K is the interval-based radial stiffness
// matrix, W the node weights with a positive floor at the origin so the
// operator stays definite there.
inline Tridiagonal radial_h1_operator(const RadialGrid& grid, double mass_coeff) {
  const std::size_t m = grid.size() - 1;  // free DOFs: 0..m-1
  const double h = grid.spacing;
  const double omega = grid.weights[1] / (h * std::pow(grid.nodes[1], grid.dimension - 1));
  std::vector<double> face(m);  // interval weight omega * r_{k+1/2}^{N-1} * h
  for (std::size_t k = 0; k < m; ++k) {
    const double rm = 0.5 * (grid.nodes[k] + grid.nodes[k + 1]);
    face[k] = omega * std::pow(rm, grid.dimension - 1) * h;
  }
  Tridiagonal op;
  op.lower.assign(m, 0.0);
  op.diag.assign(m, 0.0);
  op.upper.assign(m, 0.0);
  const double inv_h2 = 1.0 / (h * h);
  const double w_floor = face[0] * 0.5;
  for (std::size_t k = 0; k < m; ++k) {
    double diag = 0.0;
    if (k > 0) {
      diag += face[k - 1] * inv_h2;
      op.lower[k] = -face[k - 1] * inv_h2;
    }
    diag += face[k] * inv_h2;  // interval to the right (node m is pinned)
    if (k + 1 < m) op.upper[k] = -face[k] * inv_h2;
    const double w = grid.weights[k] > 0.0 ? grid.weights[k] : w_floor;
    op.diag[k] = diag + mass_coeff * w;
  }
  return op;
}

}  // namespace nls::detail
