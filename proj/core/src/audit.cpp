#include "nls/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

namespace nls {

namespace {

constexpr double kTieTol = 1e-10;

std::vector<std::vector<double>> sample_directions(int k, int extra,
                                                   std::uint64_t seed) {
  std::vector<std::vector<double>> dirs;
  // coordinate directions first so single-component maxima are hit exactly
  for (int i = 0; i < k; ++i) {
    std::vector<double> d(k, 0.0);
    d[i] = 1.0;
    dirs.push_back(d);
    d[i] = -1.0;
    dirs.push_back(std::move(d));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int s = 0; s < extra; ++s) {
    std::vector<double> d(k);
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (auto& x : d) {
        x = normal(rng);
        norm2 += x * x;
      }
    } while (norm2 < 1e-12);
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : d) x *= inv;
    dirs.push_back(std::move(d));
  }
  return dirs;
}

std::vector<double> shell_amplitudes(const AuditOptions& opt) {
  const double lo = std::log10(opt.amplitude_min);
  const double hi = std::log10(opt.amplitude_max);
  const int steps = std::max(1, static_cast<int>(std::lround((hi - lo) * opt.shells_per_decade)));
  std::vector<double> t(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    t[i] = std::pow(10.0, lo + (hi - lo) * i / steps);
  }
  return t;
}

// least-squares slope of y against x
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

struct ShellSamples {
  std::vector<double> amplitudes;
  // [shell][direction] values
  std::vector<std::vector<double>> ratio_2n;    // G_tilde / t^{2_N}
  std::vector<std::vector<double>> ratio_star;  // G_tilde / t^{2^*}
  std::vector<std::vector<double>> a4_margin;   // normalized <h,u> - 2_N H
  std::vector<std::vector<double>> a5_lo;       // normalized H - (4/N) G
  std::vector<std::vector<double>> a5_hi;       // normalized (2^*-2) G - H
  std::vector<std::vector<double>> h_bound;     // |h| / (t + t^{2^*-1})
};

ShellSamples collect(const NonlinearitySpec& spec, const AuditOptions& opt) {
  const int k = spec.num_components();
  const auto dirs = sample_directions(k, opt.num_directions, opt.seed);
  ShellSamples s;
  s.amplitudes = shell_amplitudes(opt);
  const std::size_t ns = s.amplitudes.size();
  const std::size_t nd = dirs.size();
  auto alloc = [&] { return std::vector<std::vector<double>>(ns, std::vector<double>(nd)); };
  s.ratio_2n = alloc();
  s.ratio_star = alloc();
  s.a4_margin = alloc();
  s.a5_lo = alloc();
  s.a5_hi = alloc();
  s.h_bound = alloc();

  const double two_n = spec.l2_critical_exponent();
  const double two_star = spec.sobolev_critical_exponent();
  const double four_over_n = 4.0 / spec.dimension();
  std::vector<double> u(k), h(k);

  for (std::size_t si = 0; si < ns; ++si) {
    const double t = s.amplitudes[si];
    for (std::size_t di = 0; di < nd; ++di) {
      for (int i = 0; i < k; ++i) u[i] = t * dirs[di][i];
      const double g_tilde = spec.eval_G_tilde(u);
      const double h_tilde = spec.eval_H_tilde(u);
      spec.eval_h_tilde(u, h);
      double hu = 0.0, hnorm2 = 0.0;
      for (int i = 0; i < k; ++i) {
        hu += h[i] * u[i];
        hnorm2 += h[i] * h[i];
      }
      s.ratio_2n[si][di] = g_tilde / std::pow(t, two_n);
      s.ratio_star[si][di] = g_tilde / std::pow(t, two_star);
      const double ref4 = std::abs(hu) + std::abs(two_n * h_tilde) + 1e-300;
      s.a4_margin[si][di] = (hu - two_n * h_tilde) / ref4;
      const double ref5 = std::abs(g_tilde) + std::abs(h_tilde) + 1e-300;
      s.a5_lo[si][di] = (h_tilde - four_over_n * g_tilde) / ref5;
      s.a5_hi[si][di] = ((two_star - 2.0) * g_tilde - h_tilde) / ref5;
      s.h_bound[si][di] = std::sqrt(hnorm2) / (t + std::pow(t, two_star - 1.0));
    }
  }
  return s;
}

double row_max(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end());
}
double row_min(const std::vector<double>& v) {
  return *std::min_element(v.begin(), v.end());
}

}  // namespace

bool AuditReport::passes_a1_to_a5() const {
  return a1.ok() && a2.ok() && a3.ok() && a4.ok() && a5.ok();
}

bool AuditReport::passes_all_with_strict() const {
  return a0.ok() && passes_a1_to_a5() && a4_strict.ok();
}

std::string AuditReport::summary() const {
  auto word = [](const AssumptionVerdict& v) {
    switch (v.status) {
      case AuditStatus::pass: return "pass";
      case AuditStatus::fail: return "fail";
      default: return "inconclusive";
    }
  };
  std::ostringstream os;
  os << "A0 " << word(a0) << " (c~ " << c_tilde << "), A1 " << word(a1)
     << " (eta " << eta << "), A2 " << word(a2) << ", A3 " << word(a3)
     << ", A4 " << word(a4) << ", A4-strict " << word(a4_strict) << ", A5 "
     << word(a5);
  return os.str();
}

AuditReport audit_assumptions(const NonlinearitySpec& spec,
                              const AuditOptions& opt) {
  const auto s = collect(spec, opt);
  const std::size_t ns = s.amplitudes.size();
  AuditReport rep;

  // (A0): the bound |h_tilde| <= c (|u| + |u|^{2^*-1}) with the observed c.
  double c_tilde = 0.0;
  for (const auto& row : s.h_bound) c_tilde = std::max(c_tilde, row_max(row));
  rep.c_tilde = c_tilde;
  rep.a0.status = std::isfinite(c_tilde) ? AuditStatus::pass : AuditStatus::fail;
  rep.a0.margin = c_tilde;
  rep.a0.note = "observed constant, not certified";

  // (A1): limsup of the 2_N-ratio at 0, classified by the log-log slope on
  // the smallest decade. A negative slope means the ratio grows as the
  // amplitude shrinks (limsup = infinity), a positive one that it decays to
  // zero; near-zero slope reads the plateau off the smallest shells.
  const int per_decade = opt.shells_per_decade;
  const std::size_t small_count = std::min<std::size_t>(ns, 2 * per_decade + 1);
  double eta_window = 0.0;
  for (std::size_t si = 0; si < small_count; ++si) {
    eta_window = std::max(eta_window, row_max(s.ratio_2n[si]));
  }
  std::vector<double> log_t, log_ratio;
  for (std::size_t si = 0; si < std::min<std::size_t>(ns, per_decade + 1); ++si) {
    log_t.push_back(std::log(s.amplitudes[si]));
    log_ratio.push_back(std::log(std::max(row_max(s.ratio_2n[si]), 1e-300)));
  }
  const double slope0 = fit_slope(log_t, log_ratio);
  if (slope0 < -1e-3 && eta_window > kTieTol) {
    rep.eta = eta_window;
    rep.a1.margin = eta_window;
    rep.a1.status = AuditStatus::fail;
    rep.a1.note = "G_tilde/|u|^{2_N} grows as |u| -> 0";
  } else if (slope0 > 1e-3) {
    rep.eta = 0.0;
    rep.a1.margin = 0.0;
    rep.a1.status = AuditStatus::pass;
    rep.a1.note = "ratio decays toward zero amplitude";
  } else {
    double eta = 0.0;  // plateau: read the smallest half decade
    for (std::size_t si = 0; si <= std::min<std::size_t>(ns - 1, per_decade / 2); ++si) {
      eta = std::max(eta, row_max(s.ratio_2n[si]));
    }
    rep.eta = eta;
    rep.a1.margin = eta;
    rep.a1.status = AuditStatus::pass;
  }

  // (A2): along every direction the 2_N-ratio must blow up (theta = 0) or
  // stay bounded away from zero (theta > 0) on the largest shells.
  {
    const std::size_t last = ns - 1;
    const std::size_t prev = ns - 1 - std::min<std::size_t>(ns - 1, per_decade);
    double worst_growth = std::numeric_limits<double>::infinity();
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t di = 0; di < s.ratio_2n[last].size(); ++di) {
      min_ratio = std::min(min_ratio, s.ratio_2n[last][di]);
      const double num = s.ratio_2n[last][di];
      const double den = std::max(s.ratio_2n[prev][di], 1e-300);
      worst_growth = std::min(worst_growth, num / den);
    }
    if (spec.has_critical_part()) {
      rep.a2.margin = min_ratio;
      rep.a2.status = min_ratio > kTieTol ? AuditStatus::pass : AuditStatus::fail;
      if (!rep.a2.ok()) rep.a2.note = "liminf G_tilde/|u|^{2_N} at infinity is 0";
    } else {
      rep.a2.margin = worst_growth - 1.0;
      if (worst_growth > 1.0 + kTieTol && min_ratio > kTieTol) {
        rep.a2.status = AuditStatus::pass;
      } else if (std::abs(worst_growth - 1.0) <= kTieTol) {
        rep.a2.status = AuditStatus::inconclusive;
        rep.a2.note = "ratio stalls on the sampled shells";
      } else {
        rep.a2.status = AuditStatus::fail;
        rep.a2.note = "G_tilde/|u|^{2_N} does not grow along some direction";
      }
    }
  }

  // (A3): max of G_tilde/|u|^{2^*} must decay on the largest shells.
  {
    std::vector<double> lt, lr;
    for (std::size_t si = ns - 1 - std::min<std::size_t>(ns - 1, per_decade); si < ns; ++si) {
      lt.push_back(std::log(s.amplitudes[si]));
      lr.push_back(std::log(std::max(row_max(s.ratio_star[si]), 1e-300)));
    }
    const double slope = fit_slope(lt, lr);
    const double tail = row_max(s.ratio_star[ns - 1]);
    rep.a3.margin = -slope;
    if (slope < -1e-3 || tail < kTieTol) {
      rep.a3.status = AuditStatus::pass;
    } else if (std::abs(slope) <= 1e-3) {
      rep.a3.status = AuditStatus::inconclusive;
      rep.a3.note = "2^*-ratio neither grows nor decays on the sampled shells";
    } else {
      rep.a3.status = AuditStatus::fail;
      rep.a3.note = "G_tilde has Sobolev-critical growth at infinity";
    }
  }

  // (A4): worst normalized margin of <h_tilde,u> - 2_N H_tilde over all samples.
  {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& row : s.a4_margin) worst = std::min(worst, row_min(row));
    rep.a4.margin = worst;
    rep.a4.status = worst >= -kTieTol ? AuditStatus::pass : AuditStatus::fail;
  }

  // (A4, strict near zero): only binding when theta = 0.
  if (spec.has_critical_part()) {
    rep.a4_strict.status = AuditStatus::pass;
    rep.a4_strict.note = "vacuous: theta > 0";
    rep.a4_strict.margin = 0.0;
  } else {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t si = 0; si < std::min<std::size_t>(ns, per_decade + 1); ++si) {
      best = std::max(best, row_max(s.a4_margin[si]));
    }
    rep.a4_strict.margin = best;
    if (!rep.a4.ok()) {
      rep.a4_strict.status = AuditStatus::fail;
      rep.a4_strict.note = "(A4) itself fails";
    } else if (best > kTieTol) {
      rep.a4_strict.status = AuditStatus::pass;
    } else {
      rep.a4_strict.status = AuditStatus::fail;
      rep.a4_strict.note = "no strict inequality found near zero";
    }
  }

  // (A5): both one-sided comparisons.
  {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t si = 0; si < ns; ++si) {
      worst = std::min(worst, std::min(row_min(s.a5_lo[si]), row_min(s.a5_hi[si])));
    }
    rep.a5.margin = worst;
    rep.a5.status = worst >= -kTieTol ? AuditStatus::pass : AuditStatus::fail;
  }

  return rep;
}

double estimate_eta(const NonlinearitySpec& spec, const AuditOptions& opt) {
  return audit_assumptions(spec, opt).eta;
}

Eta2Check check_eta2(const NonlinearitySpec& spec, std::span<const double> rho,
                     double gn_constant_2n, std::optional<double> eta_override) {
  if (rho.size() != static_cast<std::size_t>(spec.num_components())) {
    throw std::invalid_argument("check_eta2: rho size must equal K");
  }
  Eta2Check out;
  out.eta = eta_override ? *eta_override : estimate_eta(spec);
  double rho_norm2 = 0.0;
  for (double r : rho) rho_norm2 += r * r;
  const double two_n = spec.l2_critical_exponent();
  out.lhs = spec.sobolev_critical_exponent() *
            std::pow(gn_constant_2n, two_n) * out.eta *
            std::pow(std::sqrt(rho_norm2), 4.0 / spec.dimension());
  out.margin = 1.0 - out.lhs;
  out.satisfied = out.lhs < 1.0;
  return out;
}

}  // namespace nls
