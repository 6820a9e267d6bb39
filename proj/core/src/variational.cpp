#include "nls/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fd_operators.hpp"

namespace nls {

namespace {

// Fritsch-Carlson slopes on a uniform grid: harmonic mean of adjacent
// secants where they agree in sign, 0 at local extrema. Keeps the cubic
// Hermite interpolant monotone between nodes, so nonnegative decreasing
// profiles stay nonnegative under resampling.
std::vector<double> pchip_slopes(const std::vector<double>& y, double h) {
  const std::size_t m = y.size() - 1;
  std::vector<double> d(m + 1);
  auto secant = [&](std::size_t k) { return (y[k + 1] - y[k]) / h; };
  for (std::size_t k = 1; k < m; ++k) {
    const double dl = secant(k - 1), dr = secant(k);
    d[k] = (dl * dr > 0.0) ? 2.0 * dl * dr / (dl + dr) : 0.0;
  }
  auto edge = [&](double d0, double d1) {
    double s = (3.0 * d0 - d1) / 2.0;
    if (s * d0 <= 0.0) {
      s = 0.0;
    } else if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) {
      s = 3.0 * d0;
    }
    return s;
  };
  d[0] = edge(secant(0), secant(1));
  d[m] = edge(secant(m - 1), secant(m - 2));
  return d;
}

double hermite_eval(const std::vector<double>& y, const std::vector<double>& d,
                    double h, double x) {
  const std::size_t m = y.size() - 1;
  double cell = std::floor(x / h);
  if (cell < 0.0) cell = 0.0;
  std::size_t k = static_cast<std::size_t>(cell);
  if (k >= m) k = m - 1;
  const double t = x / h - static_cast<double>(k);
  const double t2 = t * t, t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * y[k] + (t3 - 2.0 * t2 + t) * h * d[k] +
         (-2.0 * t3 + 3.0 * t2) * y[k + 1] + (t3 - t2) * h * d[k + 1];
}

bool is_zero_state(const StateVector& u) {
  for (const auto& f : u.components) {
    for (double v : f.values) {
      if (v != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

double energy_J(const StateVector& u, const NonlinearitySpec& spec) {
  return 0.5 * grad_norm_sq(u) - integral_G(spec, u);
}

double constraint_M(const StateVector& u, const NonlinearitySpec& spec) {
  if (is_zero_state(u)) {
    throw std::invalid_argument("constraint_M: undefined on the zero state");
  }
  const double n = static_cast<double>(u.grid()->dimension);
  return grad_norm_sq(u) - 0.5 * n * integral_H(spec, u);
}

double integral_vector_abs_pow(const StateVector& u, double p) {
  const auto& grid = *u.grid();
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = grid.weights[k];
    if (w == 0.0) continue;
    double norm2 = 0.0;
    for (const auto& f : u.components) norm2 += f.values[k] * f.values[k];
    acc += w * std::pow(norm2, 0.5 * p);
  }
  return acc;
}

RadialField dilate(const RadialField& u, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("dilate: s must be positive");
  if (s == 1.0) return u;
  const auto& grid = *u.grid;
  const double n = static_cast<double>(grid.dimension);
  const double amp = std::pow(s, 0.5 * n);
  const auto slopes = pchip_slopes(u.values, grid.spacing);
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double q = s * grid.nodes[k];
    if (q > grid.r_max) break;  // truncation: zero beyond r_max
    out[k] = amp * hermite_eval(u.values, slopes, grid.spacing, q);
  }
  return RadialField(u.grid, std::move(out));
}

StateVector dilate(const StateVector& u, double s) {
  std::vector<RadialField> comps;
  comps.reserve(u.num_components());
  for (const auto& f : u.components) comps.push_back(dilate(f, s));
  return StateVector(std::move(comps));
}

StateVector argument_scale(const StateVector& u, double r_scale) {
  if (!(r_scale > 0.0)) throw std::invalid_argument("argument_scale: scale must be positive");
  std::vector<RadialField> comps;
  comps.reserve(u.num_components());
  for (const auto& f : u.components) {
    const auto slopes = pchip_slopes(f.values, f.grid->spacing);
    std::vector<double> out(f.grid->size(), 0.0);
    for (std::size_t k = 0; k < f.grid->size(); ++k) {
      const double q = r_scale * f.grid->nodes[k];
      if (q > f.grid->r_max) break;
      out[k] = hermite_eval(f.values, slopes, f.grid->spacing, q);
    }
    comps.emplace_back(f.grid, std::move(out));
  }
  return StateVector(std::move(comps));
}

double manifold_radius(const StateVector& u, const NonlinearitySpec& spec) {
  const double ih = integral_H(spec, u);
  if (!(ih > 0.0)) {
    throw std::invalid_argument("manifold_radius: requires int H(u) > 0");
  }
  const double n = static_cast<double>(u.grid()->dimension);
  return std::sqrt(n * ih / (2.0 * grad_norm_sq(u)));
}

FiberEvaluator::FiberEvaluator(const StateVector& u, const NonlinearitySpec& spec)
    : u_(&u), spec_(&spec), grad_sq_(nls::grad_norm_sq(u)) {}

FiberEvaluator::FiberEvaluator(const StateVector& u, const NonlinearitySpec& spec,
                               double grad_sq)
    : u_(&u), spec_(&spec), grad_sq_(grad_sq) {}

double FiberEvaluator::integral_pointwise(double s, bool want_h) const {
  const auto& grid = *u_->grid();
  const int k = static_cast<int>(u_->num_components());
  const double amp = std::pow(s, 0.5 * grid.dimension);
  std::vector<double> point(k);
  double acc = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double w = grid.weights[node];
    if (w == 0.0) continue;
    for (int i = 0; i < k; ++i) point[i] = amp * u_->components[i].values[node];
    acc += w * (want_h ? spec_->eval_H(point) : spec_->eval_G(point));
  }
  return acc * std::pow(s, -static_cast<double>(grid.dimension));
}

double FiberEvaluator::phi(double s) const {
  return 0.5 * s * s * grad_sq_ - integral_pointwise(s, false);
}

double FiberEvaluator::constraint(double s) const {
  const double n = static_cast<double>(u_->grid()->dimension);
  return s * s * grad_sq_ - 0.5 * n * integral_pointwise(s, true);
}

void FiberEvaluator::constraint_with_derivative(double s, double& value,
                                                double& derivative) const {
  const auto& grid = *u_->grid();
  const double n = static_cast<double>(grid.dimension);
  const int k = static_cast<int>(u_->num_components());
  const double amp = std::pow(s, 0.5 * n);
  std::vector<double> point(k), hp(k);
  double integral_h = 0.0, integral_hu = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double w = grid.weights[node];
    if (w == 0.0) continue;
    for (int i = 0; i < k; ++i) point[i] = amp * u_->components[i].values[node];
    integral_h += w * spec_->eval_H(point);
    spec_->eval_h(point, hp);
    double dot = 0.0;
    for (int i = 0; i < k; ++i) dot += hp[i] * u_->components[i].values[node];
    integral_hu += w * dot;
  }
  const double s_mn = std::pow(s, -n);
  value = s * s * grad_sq_ - 0.5 * n * s_mn * integral_h;
  // d/ds of the H term: -N s^{-N-1} I_H + s^{-N} (N/2) s^{N/2-1} int <h, u>
  derivative = 2.0 * s * grad_sq_ -
               0.5 * n * (-n * s_mn / s * integral_h +
                          s_mn * 0.5 * n * std::pow(s, 0.5 * n - 1.0) * integral_hu);
}

namespace {

struct EtaCheck {
  bool ok;
  double bound;
};

EtaCheck eta_precondition(const StateVector& u, double grad_sq,
                          const NonlinearitySpec& spec, double eta_estimate) {
  const double l2n = integral_vector_abs_pow(u, spec.l2_critical_exponent());
  const double bound = grad_sq / (2.0 * l2n);
  return {eta_estimate < bound, bound};
}

}  // namespace

FiberScan fiber_scan(const StateVector& u, const NonlinearitySpec& spec,
                     double s_min, double s_max, std::size_t count,
                     double eta_estimate) {
  if (!(s_min > 0.0) || !(s_max > s_min) || count < 3) {
    throw std::invalid_argument("fiber_scan: bad scan range");
  }
  FiberEvaluator fib(u, spec);
  FiberScan scan;
  scan.s.resize(count);
  scan.phi.resize(count);
  scan.constraint.resize(count);
  const double llo = std::log(s_min), lhi = std::log(s_max);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                        static_cast<double>(count - 1));
    scan.s[i] = s;
    scan.phi[i] = fib.phi(s);
    scan.constraint[i] = fib.constraint(s);
  }
  const double max_phi = *std::max_element(scan.phi.begin(), scan.phi.end());
  const double tol = 1e-12 * std::max(1.0, std::abs(max_phi));
  std::size_t lo = 0, hi = 0;
  bool found = false;
  for (std::size_t i = 0; i < count; ++i) {
    if (scan.phi[i] >= max_phi - tol) {
      if (!found) lo = i;
      hi = i;
      found = true;
    }
  }
  scan.maximizer_lo = scan.s[lo];
  scan.maximizer_hi = scan.s[hi];
  scan.plateau = hi > lo + 1;

  const auto eta = eta_precondition(u, fib.grad_norm_sq(), spec, eta_estimate);
  scan.eta_used = eta_estimate;
  scan.eta_bound = eta.bound;
  scan.eta_precondition_ok = eta.ok;
  return scan;
}

double fiber_root(const FiberEvaluator& fib, int /*dimension*/, double s_guess) {
  // Bracket the sign change: M(s * u) is positive for small s, negative for
  // large s under the standing assumptions.
  constexpr double kLo = 1e-6, kHi = 1e+6;
  double lo = std::max(kLo, s_guess * 0.9);
  double hi = std::min(kHi, s_guess * 1.1);
  double f_lo = fib.constraint(lo);
  double f_hi = fib.constraint(hi);
  while (f_lo < 0.0 && lo > kLo) {
    hi = lo;
    f_hi = f_lo;
    lo = std::max(kLo, lo * 0.25);
    f_lo = fib.constraint(lo);
  }
  while (f_hi > 0.0 && hi < kHi) {
    lo = hi;
    f_lo = f_hi;
    hi = std::min(kHi, hi * 4.0);
    f_hi = fib.constraint(hi);
  }
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (f_lo < 0.0 || f_hi > 0.0) {
    throw FiberProjectionError(
        "fiber_root: no sign change of M(s*u) in [1e-6, 1e6]; (eq:eta)-type "
        "smallness or the growth assumption (A2) fails for this state");
  }

  // Safeguarded Newton on the analytic map.
  double s = std::clamp(s_guess, lo, hi);
  for (int it = 0; it < 80; ++it) {
    double f, fp;
    fib.constraint_with_derivative(s, f, fp);
    const double f_scale =
        s * s * fib.grad_norm_sq() + std::abs(s * s * fib.grad_norm_sq() - f);
    if (std::abs(f) <= 1e-14 * f_scale) return s;
    if (f > 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    double next = (fp != 0.0) ? s - f / fp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4e-16 * hi) return 0.5 * (lo + hi);
    s = next;
  }
  return s;
}

ProjectionResult project_to_M(const StateVector& u, const NonlinearitySpec& spec,
                              double eta_estimate, double s_guess,
                              double polish_target) {
  if (is_zero_state(u)) {
    throw std::invalid_argument("project_to_M: zero state");
  }
  FiberEvaluator fib(u, spec);
  const auto eta = eta_precondition(u, fib.grad_norm_sq(), spec, eta_estimate);

  const double s_hat = fiber_root(fib, u.grid()->dimension, s_guess);

  // Polish on the resampled state so the returned field itself sits on the
  // discrete manifold; the analytic and resampled constraints differ by a
  // smooth discretization offset, so Newton steps with the analytic slope
  // converge, with a bracket bisection as fallback.
  auto discrete_m = [&](double s) { return constraint_M(dilate(u, s), spec); };
  const double scale = std::max(fib.grad_norm_sq(), 1e-300);
  const double target = polish_target;

  double s_best = s_hat;
  double f_best = discrete_m(s_hat);
  if (std::abs(f_best) > target * scale) {
    double a = s_hat, b = s_hat, fa = f_best, fb = f_best;
    for (int expand = 0; fa * fb > 0.0 && expand < 200; ++expand) {
      if (fa > 0.0) {
        b = b * 1.02;
        fb = discrete_m(b);
        if (fb > 0.0) {
          a = b;
          fa = fb;
        }
      } else {
        a = a / 1.02;
        fa = discrete_m(a);
        if (fa < 0.0) {
          b = a;
          fb = fa;
        }
      }
    }
    if (fa * fb > 0.0) {
      throw FiberProjectionError(
          "project_to_M: resampled constraint has no root near the analytic one");
    }
    for (int it = 0; it < 200; ++it) {
      double f_dummy, fp;
      fib.constraint_with_derivative(s_best, f_dummy, fp);
      double cand = (fp != 0.0) ? s_best - f_best / fp : 0.5 * (a + b);
      if (!(cand > a && cand < b)) cand = 0.5 * (a + b);
      const double fc = discrete_m(cand);
      if ((fc > 0.0) == (fa > 0.0)) {
        a = cand;
        fa = fc;
      } else {
        b = cand;
        fb = fc;
      }
      s_best = cand;
      f_best = fc;
      if (std::abs(f_best) <= target * scale || (b - a) <= 1e-15 * b) break;
    }
  }

  ProjectionResult out{dilate(u, s_best), s_best, eta.ok, eta.bound};
  return out;
}

IdentityResiduals residuals(const StateVector& u, std::span<const double> lambda,
                            const NonlinearitySpec& spec) {
  IdentityResiduals res;
  if (is_zero_state(u)) return res;
  if (lambda.size() != u.num_components()) {
    throw std::invalid_argument("residuals: lambda size must equal K");
  }
  const double grad_sq = grad_norm_sq(u);
  const double n = static_cast<double>(u.grid()->dimension);
  const double two_star = spec.sobolev_critical_exponent();

  double lambda_mass = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    lambda_mass += lambda[i] * mass(u.components[i]);
  }
  const double nehari_raw = grad_sq + lambda_mass - integral_gu(spec, u);
  const double pohozaev_raw =
      grad_sq - two_star * (integral_G(spec, u) - 0.5 * lambda_mass);
  const double m_raw = grad_sq - 0.5 * n * integral_H(spec, u);

  res.grad_norm_sq = grad_sq;
  res.nehari_res = nehari_raw / grad_sq;
  res.pohozaev_res = pohozaev_raw / grad_sq;
  res.M_value = m_raw / grad_sq;
  return res;
}

std::vector<std::vector<double>> energy_gradient(const StateVector& u,
                                                 const NonlinearitySpec& spec) {
  const auto& grid = *u.grid();
  const std::size_t k = u.num_components();
  std::vector<std::vector<double>> grad(k);
  for (std::size_t i = 0; i < k; ++i) {
    grad[i] = detail::dirichlet_energy_gradient(u.components[i]);
    for (auto& g : grad[i]) g *= 0.5;
  }
  std::vector<double> point(k), gp(k);
  for (std::size_t node = 0; node + 1 < grid.size(); ++node) {
    const double w = grid.weights[node];
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < k; ++i) point[i] = u.components[i].values[node];
    spec.eval_g(point, gp);
    for (std::size_t i = 0; i < k; ++i) grad[i][node] -= w * gp[i];
  }
  return grad;
}

}  // namespace nls
