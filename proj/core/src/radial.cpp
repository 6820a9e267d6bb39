#include "nls/radial.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nls {

double unit_sphere_area(int dimension) {
  const double n = static_cast<double>(dimension);
  return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
}

GridPtr make_grid(int dimension, double r_max, std::size_t node_count) {
  if (dimension < 3) {
    throw std::invalid_argument("make_grid: dimension must be >= 3, got " +
                                std::to_string(dimension));
  }
  if (!(r_max > 0.0)) {
    throw std::invalid_argument("make_grid: r_max must be positive");
  }
  if (node_count < 16) {
    throw std::invalid_argument("make_grid: need at least 16 nodes");
  }

  auto grid = std::make_shared<RadialGrid>();
  grid->dimension = dimension;
  grid->r_max = r_max;

  const std::size_t m = node_count;  // index of the last node
  const double h = r_max / static_cast<double>(m);
  grid->spacing = h;
  grid->nodes.resize(m + 1);
  grid->weights.resize(m + 1);

  const double omega = unit_sphere_area(dimension);
  for (std::size_t k = 0; k <= m; ++k) {
    const double r = h * static_cast<double>(k);
    grid->nodes[k] = r;
    const double trap = (k == 0 || k == m) ? 0.5 : 1.0;
    grid->weights[k] = trap * h * omega * std::pow(r, dimension - 1);
  }
  // r_0 = 0 makes weights[0] vanish for N >= 3 already; keep it exact.
  grid->weights[0] = 0.0;
  return grid;
}

RadialField::RadialField(GridPtr g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw std::invalid_argument("RadialField: null grid");
  if (values.size() != grid->size()) {
    throw std::invalid_argument("RadialField: value count must equal node count");
  }
  values.back() = 0.0;
}

RadialField::RadialField(GridPtr g) : grid(std::move(g)) {
  if (!grid) throw std::invalid_argument("RadialField: null grid");
  values.assign(grid->size(), 0.0);
}

StateVector::StateVector(std::vector<RadialField> c) : components(std::move(c)) {
  if (components.empty()) {
    throw std::invalid_argument("StateVector: need at least one component");
  }
  const auto& g = components.front().grid;
  for (const auto& f : components) {
    if (f.grid != g) {
      throw std::invalid_argument("StateVector: components must share one grid");
    }
  }
}

StateVector::StateVector(GridPtr g, std::size_t k) {
  if (k == 0) throw std::invalid_argument("StateVector: need at least one component");
  components.reserve(k);
  for (std::size_t i = 0; i < k; ++i) components.emplace_back(g);
}

double integrate(const RadialGrid& grid, std::span<const double> samples) {
  if (samples.size() != grid.size()) {
    throw std::invalid_argument("integrate: sample count mismatch");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) acc += grid.weights[k] * samples[k];
  return acc;
}

double integrate(const RadialField& f) { return integrate(*f.grid, f.values); }

double mass(const RadialField& u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    acc += u.grid->weights[k] * u.values[k] * u.values[k];
  }
  return acc;
}

double lp_norm(const RadialField& u, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  double acc = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    acc += u.grid->weights[k] * std::pow(std::abs(u.values[k]), p);
  }
  return std::pow(acc, 1.0 / p);
}

double inner_l2(const RadialField& u, const RadialField& v) {
  if (u.grid != v.grid) throw std::invalid_argument("inner_l2: grid mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    acc += u.grid->weights[k] * u.values[k] * v.values[k];
  }
  return acc;
}

std::vector<double> radial_derivative(const RadialField& u,
                                      bool enforce_zero_slope_at_origin) {
  const auto& v = u.values;
  const double h = u.grid->spacing;
  const std::size_t m = v.size() - 1;
  std::vector<double> d(m + 1);
  d[0] = enforce_zero_slope_at_origin ? 0.0 : (v[1] - v[0]) / h;
  for (std::size_t k = 1; k < m; ++k) d[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
  d[m] = (v[m] - v[m - 1]) / h;
  return d;
}

double grad_norm_sq(const RadialField& u) {
  const auto d = radial_derivative(u);
  double acc = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) acc += u.grid->weights[k] * d[k] * d[k];
  return acc;
}

double grad_norm_sq(const StateVector& u) {
  double acc = 0.0;
  for (const auto& f : u.components) acc += grad_norm_sq(f);
  return acc;
}

std::vector<double> radial_laplacian(const RadialField& u) {
  const auto& v = u.values;
  const double h = u.grid->spacing;
  const double n = static_cast<double>(u.grid->dimension);
  const std::size_t m = v.size() - 1;
  std::vector<double> lap(m + 1);
  // regular origin: lap = N u''(0), ghost value v[-1] = v[1]
  lap[0] = n * 2.0 * (v[1] - v[0]) / (h * h);
  for (std::size_t k = 1; k < m; ++k) {
    const double r = u.grid->nodes[k];
    const double d2 = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / (h * h);
    const double d1 = (v[k + 1] - v[k - 1]) / (2.0 * h);
    lap[k] = d2 + (n - 1.0) / r * d1;
  }
  lap[m] = lap[m - 1];  // boundary value is never weighted in practice
  return lap;
}

}  // namespace nls
