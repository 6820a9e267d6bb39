#include "nls/nonlinearity.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nls {

namespace {

// |t|^q
inline double abs_pow(double t, double q) { return std::pow(std::abs(t), q); }

// sign(t) |t|^q, odd in t
inline double signed_pow(double t, double q) {
  const double a = std::pow(std::abs(t), q);
  return t < 0.0 ? -a : a;
}

inline void check_finite(std::span<const double> u) {
  for (double x : u) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("nonlinearity: non-finite input");
    }
  }
}

}  // namespace

NonlinearitySpec::NonlinearitySpec(int dimension, int num_components,
                                   std::vector<NonlinearityTerm> terms)
    : dimension_(dimension),
      num_components_(num_components),
      terms_(std::move(terms)) {
  if (dimension_ < 3) throw std::invalid_argument("NonlinearitySpec: dimension must be >= 3");
  if (num_components_ < 1) throw std::invalid_argument("NonlinearitySpec: K must be >= 1");

  const double n = static_cast<double>(dimension_);
  two_n_ = 2.0 + 4.0 / n;
  two_star_ = 2.0 * n / (n - 2.0);
  theta_.assign(num_components_, 0.0);

  auto check_component = [&](int i) {
    if (i < 0 || i >= num_components_) {
      throw std::invalid_argument("NonlinearitySpec: component index out of range");
    }
  };

  for (const auto& term : terms_) {
    if (const auto* sp = std::get_if<SeparablePower>(&term)) {
      check_component(sp->component);
      if (sp->mu < 0.0) throw std::invalid_argument("SeparablePower: mu must be >= 0");
      if (!(sp->exponent > 2.0) || !(sp->exponent < two_star_)) {
        throw std::invalid_argument(
            "SeparablePower: exponent must lie in (2, 2^*); use SobolevCritical "
            "for the critical power");
      }
    } else if (const auto* lp = std::get_if<LogPower>(&term)) {
      check_component(lp->component);
      if (!(lp->mu > 0.0)) throw std::invalid_argument("LogPower: mu must be > 0");
      if (!(lp->exponent >= two_n_) || !(lp->exponent <= two_star_ - 1.0)) {
        throw std::invalid_argument("LogPower: exponent must lie in [2_N, 2^*-1]");
      }
    } else if (const auto* cp = std::get_if<CouplingProduct>(&term)) {
      if (cp->beta < 0.0) throw std::invalid_argument("CouplingProduct: beta must be >= 0");
      if (static_cast<int>(cp->exponents.size()) != num_components_) {
        throw std::invalid_argument("CouplingProduct: exponent count must equal K");
      }
      double sum = 0.0;
      int strong = 0;
      for (double r : cp->exponents) {
        if (r != 0.0 && !(r > 1.0)) {
          throw std::invalid_argument("CouplingProduct: each exponent is 0 or > 1");
        }
        if (r > 1.0) ++strong;
        sum += r;
      }
      if (strong < 2) {
        throw std::invalid_argument("CouplingProduct: need exponents > 1 on at least two components");
      }
      if (!(sum >= two_n_) || !(sum < two_star_)) {
        throw std::invalid_argument("CouplingProduct: total degree must lie in [2_N, 2^*)");
      }
    } else if (const auto* sc = std::get_if<SobolevCritical>(&term)) {
      if (static_cast<int>(sc->theta.size()) != num_components_) {
        throw std::invalid_argument("SobolevCritical: theta count must equal K");
      }
      bool all_zero = true, all_pos = true;
      for (double t : sc->theta) {
        if (t < 0.0) throw std::invalid_argument("SobolevCritical: theta must be >= 0");
        if (t != 0.0) all_zero = false;
        if (!(t > 0.0)) all_pos = false;
      }
      if (!all_zero && !all_pos) {
        throw std::invalid_argument("SobolevCritical: theta is all zero or all positive");
      }
      for (int j = 0; j < num_components_; ++j) theta_[j] += sc->theta[j];
    }
  }

  bool theta_zero = true, theta_pos = true;
  for (double t : theta_) {
    if (t != 0.0) theta_zero = false;
    if (!(t > 0.0)) theta_pos = false;
  }
  if (!theta_zero && !theta_pos) {
    throw std::invalid_argument("NonlinearitySpec: aggregate theta is all zero or all positive");
  }
  has_critical_ = !theta_zero;
}

namespace {

// Per-term pointwise contributions. The H pieces follow from
// H = <g,u> - 2G term by term.

struct SepEval {
  static double G(const SeparablePower& t, double x) {
    return t.mu / t.exponent * abs_pow(x, t.exponent);
  }
  static double g(const SeparablePower& t, double x) {
    return t.mu * signed_pow(x, t.exponent - 1.0);
  }
  static double H(const SeparablePower& t, double x) {
    return t.mu * (1.0 - 2.0 / t.exponent) * abs_pow(x, t.exponent);
  }
  static double h(const SeparablePower& t, double x) {
    return t.mu * (t.exponent - 2.0) * signed_pow(x, t.exponent - 1.0);
  }
};

struct LogEval {
  // G = (mu/p)|x|^p ln(1+|x|)
  static double G(const LogPower& t, double x) {
    return t.mu / t.exponent * abs_pow(x, t.exponent) * std::log1p(std::abs(x));
  }
  static double g(const LogPower& t, double x) {
    const double a = std::abs(x);
    return t.mu * signed_pow(x, t.exponent - 1.0) * std::log1p(a) +
           t.mu / t.exponent * signed_pow(x, t.exponent) / (1.0 + a);
  }
  // H = mu (1-2/p)|x|^p ln(1+|x|) + (mu/p) |x|^{p+1}/(1+|x|)
  static double H(const LogPower& t, double x) {
    const double a = std::abs(x);
    return t.mu * (1.0 - 2.0 / t.exponent) * abs_pow(x, t.exponent) * std::log1p(a) +
           t.mu / t.exponent * abs_pow(x, t.exponent + 1.0) / (1.0 + a);
  }
  static double h(const LogPower& t, double x) {
    const double a = std::abs(x);
    const double p = t.exponent;
    const double one_a = 1.0 + a;
    const double part1 = t.mu * (1.0 - 2.0 / p) *
                         (p * signed_pow(x, p - 1.0) * std::log1p(a) +
                          signed_pow(x, p) / one_a);
    const double part2 = t.mu / p *
                         (p * signed_pow(x, p + 1.0) + (p + 1.0) * signed_pow(x, p)) /
                         (one_a * one_a);
    return part1 + part2;
  }
};

// beta * prod |u_i|^{r_i} and its derivatives
struct ProdEval {
  static double value(const CouplingProduct& t, std::span<const double> u) {
    double p = t.beta;
    for (std::size_t i = 0; i < t.exponents.size(); ++i) {
      const double r = t.exponents[i];
      if (r != 0.0) p *= abs_pow(u[i], r);
    }
    return p;
  }
  static void add_grad(const CouplingProduct& t, std::span<const double> u,
                       double scale, std::span<double> out) {
    for (std::size_t i = 0; i < t.exponents.size(); ++i) {
      const double ri = t.exponents[i];
      if (ri == 0.0) continue;
      double d = t.beta * ri * signed_pow(u[i], ri - 1.0);
      for (std::size_t k = 0; k < t.exponents.size(); ++k) {
        if (k == i) continue;
        const double rk = t.exponents[k];
        if (rk != 0.0) d *= abs_pow(u[k], rk);
      }
      out[i] += scale * d;
    }
  }
  static double degree(const CouplingProduct& t) {
    double s = 0.0;
    for (double r : t.exponents) s += r;
    return s;
  }
};

}  // namespace

double NonlinearitySpec::eval_G_tilde(std::span<const double> u) const {
  check_finite(u);
  double acc = 0.0;
  for (const auto& term : terms_) {
    if (const auto* sp = std::get_if<SeparablePower>(&term)) {
      acc += SepEval::G(*sp, u[sp->component]);
    } else if (const auto* lp = std::get_if<LogPower>(&term)) {
      acc += LogEval::G(*lp, u[lp->component]);
    } else if (const auto* cp = std::get_if<CouplingProduct>(&term)) {
      acc += ProdEval::value(*cp, u);
    }
  }
  return acc;
}

double NonlinearitySpec::eval_G(std::span<const double> u) const {
  double acc = eval_G_tilde(u);
  if (has_critical_) {
    for (int j = 0; j < num_components_; ++j) {
      acc += theta_[j] / two_star_ * abs_pow(u[j], two_star_);
    }
  }
  return acc;
}

double NonlinearitySpec::eval_H_tilde(std::span<const double> u) const {
  check_finite(u);
  double acc = 0.0;
  for (const auto& term : terms_) {
    if (const auto* sp = std::get_if<SeparablePower>(&term)) {
      acc += SepEval::H(*sp, u[sp->component]);
    } else if (const auto* lp = std::get_if<LogPower>(&term)) {
      acc += LogEval::H(*lp, u[lp->component]);
    } else if (const auto* cp = std::get_if<CouplingProduct>(&term)) {
      acc += (ProdEval::degree(*cp) - 2.0) * ProdEval::value(*cp, u);
    }
  }
  return acc;
}

double NonlinearitySpec::eval_H(std::span<const double> u) const {
  double acc = eval_H_tilde(u);
  if (has_critical_) {
    const double coeff = 1.0 - 2.0 / two_star_;
    for (int j = 0; j < num_components_; ++j) {
      acc += coeff * theta_[j] * abs_pow(u[j], two_star_);
    }
  }
  return acc;
}

void NonlinearitySpec::eval_g_tilde(std::span<const double> u,
                                    std::span<double> out) const {
  check_finite(u);
  for (auto& x : out) x = 0.0;
  for (const auto& term : terms_) {
    if (const auto* sp = std::get_if<SeparablePower>(&term)) {
      out[sp->component] += SepEval::g(*sp, u[sp->component]);
    } else if (const auto* lp = std::get_if<LogPower>(&term)) {
      out[lp->component] += LogEval::g(*lp, u[lp->component]);
    } else if (const auto* cp = std::get_if<CouplingProduct>(&term)) {
      ProdEval::add_grad(*cp, u, 1.0, out);
    }
  }
}

void NonlinearitySpec::eval_g(std::span<const double> u, std::span<double> out) const {
  eval_g_tilde(u, out);
  if (has_critical_) {
    for (int j = 0; j < num_components_; ++j) {
      out[j] += theta_[j] * signed_pow(u[j], two_star_ - 1.0);
    }
  }
}

void NonlinearitySpec::eval_h_tilde(std::span<const double> u,
                                    std::span<double> out) const {
  check_finite(u);
  for (auto& x : out) x = 0.0;
  for (const auto& term : terms_) {
    if (const auto* sp = std::get_if<SeparablePower>(&term)) {
      out[sp->component] += SepEval::h(*sp, u[sp->component]);
    } else if (const auto* lp = std::get_if<LogPower>(&term)) {
      out[lp->component] += LogEval::h(*lp, u[lp->component]);
    } else if (const auto* cp = std::get_if<CouplingProduct>(&term)) {
      ProdEval::add_grad(*cp, u, ProdEval::degree(*cp) - 2.0, out);
    }
  }
}

void NonlinearitySpec::eval_h(std::span<const double> u, std::span<double> out) const {
  eval_h_tilde(u, out);
  if (has_critical_) {
    const double coeff = two_star_ - 2.0;
    for (int j = 0; j < num_components_; ++j) {
      out[j] += coeff * theta_[j] * signed_pow(u[j], two_star_ - 1.0);
    }
  }
}

namespace {

template <typename PointFn>
double integrate_pointwise(const NonlinearitySpec& spec, const StateVector& u,
                           PointFn&& fn) {
  const auto& grid = *u.grid();
  const int k = static_cast<int>(u.num_components());
  std::vector<double> point(k);
  double acc = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double w = grid.weights[node];
    if (w == 0.0) continue;
    for (int i = 0; i < k; ++i) point[i] = u.components[i].values[node];
    acc += w * fn(spec, point);
  }
  return acc;
}

}  // namespace

double integral_G(const NonlinearitySpec& spec, const StateVector& u) {
  return integrate_pointwise(spec, u, [](const auto& s, const std::vector<double>& p) {
    return s.eval_G(p);
  });
}

double integral_H(const NonlinearitySpec& spec, const StateVector& u) {
  return integrate_pointwise(spec, u, [](const auto& s, const std::vector<double>& p) {
    return s.eval_H(p);
  });
}

double integral_gu(const NonlinearitySpec& spec, const StateVector& u) {
  std::vector<double> grad(u.num_components());
  return integrate_pointwise(spec, u,
                             [&grad](const auto& s, const std::vector<double>& p) {
                               s.eval_g(p, grad);
                               double dot = 0.0;
                               for (std::size_t i = 0; i < p.size(); ++i) dot += grad[i] * p[i];
                               return dot;
                             });
}

double integral_gi_ui(const NonlinearitySpec& spec, const StateVector& u, int i) {
  if (i < 0 || i >= static_cast<int>(u.num_components())) {
    throw std::invalid_argument("integral_gi_ui: component out of range");
  }
  std::vector<double> grad(u.num_components());
  return integrate_pointwise(spec, u,
                             [&grad, i](const auto& s, const std::vector<double>& p) {
                               s.eval_g(p, grad);
                               return grad[i] * p[i];
                             });
}

}  // namespace nls
