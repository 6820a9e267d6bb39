#pragma once

// Closed-form Gaussian moments over R^N, used as independent oracles for
// the quadrature and derivative operators.

#include <cmath>
#include <numbers>

namespace oracles {

// int_{R^N} e^{-a r^2} dx = (pi/a)^{N/2}
inline double gaussian_integral(int dimension, double a) {
  return std::pow(std::numbers::pi / a, dimension / 2.0);
}

// int_{R^N} r^m e^{-a r^2} dx = omega_{N-1} Gamma((N+m)/2) / (2 a^{(N+m)/2})
inline double gaussian_radial_moment(int dimension, double a, double m) {
  const double omega = 2.0 * std::pow(std::numbers::pi, dimension / 2.0) /
                       std::tgamma(dimension / 2.0);
  const double s = 0.5 * (dimension + m);
  return omega * std::tgamma(s) / (2.0 * std::pow(a, s));
}

}  // namespace oracles
