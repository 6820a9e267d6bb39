#pragma once

// Radially symmetric discretization of R^N, N >= 3.
//
// A field u(r) stands for the radial function x -> u(|x|). All integrals
// over R^N reduce to weighted sums over the node values, the weight of
// node k approximating omega_{N-1} r_k^{N-1} dr on its trapezoid cell
// (omega_{N-1} = surface area of the unit sphere in R^N).

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace nls {

struct RadialGrid {
  int dimension = 0;         // ambient dimension N
  double r_max = 0.0;        // truncation radius
  double spacing = 0.0;      // uniform node spacing
  std::vector<double> nodes;    // r_0 = 0 < r_1 < ... < r_M = r_max
  std::vector<double> weights;  // quadrature weights, weights[0] == 0

  std::size_t size() const { return nodes.size(); }
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// Uniform grid with composite trapezoid weights carrying the r^{N-1}
// volume factor. Throws std::invalid_argument for N < 3, M < 16 or
// nonpositive r_max.
GridPtr make_grid(int dimension, double r_max, std::size_t node_count);

// Surface area of the unit sphere S^{N-1} in R^N.
double unit_sphere_area(int dimension);

// One radial component function sampled at the grid nodes. The last value
// is pinned to 0 (homogeneous truncation boundary).
struct RadialField {
  GridPtr grid;
  std::vector<double> values;

  RadialField() = default;
  RadialField(GridPtr g, std::vector<double> v);

  // zero field on g
  explicit RadialField(GridPtr g);

  std::size_t size() const { return values.size(); }
};

// K radial components on one shared grid.
struct StateVector {
  std::vector<RadialField> components;

  StateVector() = default;
  explicit StateVector(std::vector<RadialField> c);
  StateVector(GridPtr g, std::size_t k);

  std::size_t num_components() const { return components.size(); }
  const GridPtr& grid() const { return components.front().grid; }
};

// sum_k w_k f_k for samples f on the grid's nodes
double integrate(const RadialGrid& grid, std::span<const double> samples);
double integrate(const RadialField& f);

// squared L^2 norm: integrate(u^2)
double mass(const RadialField& u);

// (integrate |u|^p)^{1/p}, p in [1, inf)
double lp_norm(const RadialField& u, double p);

// integrate(u * v) on a shared grid
double inner_l2(const RadialField& u, const RadialField& v);

// du/dr sampled at the nodes: centered differences in the interior,
// one-sided at both endpoints. Smooth radial functions have u'(0) = 0;
// enforce_zero_slope_at_origin pins the first sample accordingly (the
// origin carries zero quadrature weight either way).
std::vector<double> radial_derivative(const RadialField& u,
                                      bool enforce_zero_slope_at_origin = false);

// integrate((du/dr)^2); for radial functions |grad u|^2 = (du/dr)^2.
double grad_norm_sq(const RadialField& u);
double grad_norm_sq(const StateVector& u);

// Discrete radial Laplacian u'' + (N-1)/r u' at the nodes. At the origin
// the regular limit N u''(0) is used (with u'(0) = 0 symmetry).
std::vector<double> radial_laplacian(const RadialField& u);

}  // namespace nls
