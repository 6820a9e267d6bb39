#include "nls/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fd_operators.hpp"
#include "nls/rearrange.hpp"

namespace nls {

namespace {

constexpr double kZeroMass = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void validate(const NonlinearitySpec& spec, const GridPtr& grid,
              const SolveConfig& cfg) {
  if (!grid) throw std::invalid_argument("minimize: null grid");
  if (grid->dimension != spec.dimension()) {
    throw std::invalid_argument("minimize: grid and spec dimension mismatch");
  }
  if (cfg.rho.size() != static_cast<std::size_t>(spec.num_components())) {
    throw std::invalid_argument("minimize: rho size must equal K");
  }
  for (double r : cfg.rho) {
    if (!(r > 0.0)) throw std::invalid_argument("minimize: rho must be positive");
  }
  if (!(cfg.projected_grad_tol > 0.0) || !(cfg.initial_step > 0.0) ||
      !(cfg.backtrack_factor > 0.0) || !(cfg.backtrack_factor < 1.0)) {
    throw std::invalid_argument("minimize: bad step/tolerance configuration");
  }
  if (cfg.max_iters < 1 || cfg.multi_start < 1) {
    throw std::invalid_argument("minimize: iteration counts must be positive");
  }
}

StateVector initial_state(const GridPtr& grid, int k, const SolveConfig& cfg,
                          int start) {
  std::mt19937_64 rng(splitmix64(cfg.seed ^ (0x51ed2701ULL * (start + 1))));
  std::uniform_real_distribution<double> wjit(0.75, 1.3), ajit(0.8, 1.2);

  int zero_component = -1;
  if (k >= 2 && cfg.multi_start > k && start >= cfg.multi_start - k) {
    zero_component = start % k;
  }

  StateVector u(grid, k);
  for (int i = 0; i < k; ++i) {
    if (i == zero_component) continue;
    const auto& ws = cfg.init_widths;
    const auto& as = cfg.init_amplitudes;
    const double width = ws[(start + i) % ws.size()] * wjit(rng);
    const double amp = as[(start + i) % as.size()] * ajit(rng);
    for (std::size_t node = 0; node + 1 < grid->size(); ++node) {
      const double r = grid->nodes[node];
      u.components[i].values[node] = amp * std::exp(-r * r / (2.0 * width * width));
    }
  }
  return u;
}

void normalize_masses(StateVector& u, std::span<const double> rho) {
  for (std::size_t i = 0; i < u.num_components(); ++i) {
    const double m = mass(u.components[i]);
    if (m > kZeroMass) {
      const double scale = rho[i] / std::sqrt(m);
      for (auto& v : u.components[i].values) v *= scale;
    }
  }
}

// rescale any component over its mass budget back onto the sphere
bool ball_project(StateVector& u, std::span<const double> rho) {
  bool changed = false;
  for (std::size_t i = 0; i < u.num_components(); ++i) {
    const double m = mass(u.components[i]);
    if (m > rho[i] * rho[i]) {
      const double scale = rho[i] / std::sqrt(m);
      for (auto& v : u.components[i].values) v *= scale;
      changed = true;
    }
  }
  return changed;
}

// Components whose mass decayed below the threshold are pinned at zero: the
// zero component is invariant under the flow (superlinear nonlinearities),
// so the residue is descent debris that decays only geometrically and
// poisons the multiplier extraction. Never zeroes the whole state.
bool clean_vanished_components(StateVector& u, std::span<const double> rho,
                               double rel_threshold) {
  if (u.num_components() < 2) return false;
  std::size_t alive = 0;
  for (std::size_t i = 0; i < u.num_components(); ++i) {
    if (mass(u.components[i]) >= rel_threshold * rho[i] * rho[i]) ++alive;
  }
  if (alive == 0) return false;
  bool trimmed = false;
  for (std::size_t i = 0; i < u.num_components(); ++i) {
    const double m = mass(u.components[i]);
    if (m > 0.0 && m < rel_threshold * rho[i] * rho[i]) {
      std::fill(u.components[i].values.begin(), u.components[i].values.end(), 0.0);
      trimmed = true;
    }
  }
  return trimmed;
}

// dense symmetric solve for the multiplier fit (tiny systems)
bool solve_spd(std::vector<std::vector<double>>& a, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    }
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t row = col + 1; row < n; ++row) {
      const double f = a[row][col] / a[col][col];
      for (std::size_t j = col; j < n; ++j) a[row][j] -= f * a[col][j];
      b[row] -= f * b[col];
    }
  }
  for (std::size_t row = n; row-- > 0;) {
    double s = b[row];
    for (std::size_t j = row + 1; j < n; ++j) s -= a[row][j] * b[j];
    b[row] = s / a[row][row];
  }
  return true;
}

// The descent works with the interval-based (forward-difference) Dirichlet
// energy u^T K u instead of the centered public discretization: critical
// nonlinear terms reward concentration, and the centered derivative cannot
// see the gradient energy of structures near the grid scale, so descent on
// the public functional tunnels below the continuum ground level through
// spurious sub-grid bubbles. The interval energy prices every jump, the two
// discretizations agree to O(h^2) on resolved states, and the final iterate
// is reconciled with the public manifold by one ordinary projection.
struct DescentOps {
  const NonlinearitySpec* spec = nullptr;
  GridPtr grid;
  detail::Tridiagonal stiffness;  // K
  detail::Tridiagonal precond;    // K + W
  std::size_t free_dofs = 0;

  void init(const NonlinearitySpec& s, const GridPtr& g) {
    spec = &s;
    grid = g;
    stiffness = detail::radial_h1_operator(*g, 0.0);
    precond = detail::radial_h1_operator(*g, 1.0);
    free_dofs = g->size() - 1;
  }

  std::vector<double> apply_inverse(const std::vector<double>& g) const {
    std::vector<double> out(g.begin(), g.begin() + free_dofs);
    precond.solve(out);
    out.push_back(0.0);
    return out;
  }

  // K u padded with the boundary slot
  std::vector<double> stiffness_apply(const RadialField& f) const {
    std::vector<double> x(f.values.begin(), f.values.begin() + free_dofs);
    auto y = stiffness.apply(x);
    y.push_back(0.0);
    return y;
  }

  double dirichlet_energy(const StateVector& u) const {
    double acc = 0.0;
    for (const auto& f : u.components) {
      const auto ku = stiffness_apply(f);
      for (std::size_t node = 0; node < free_dofs; ++node) {
        acc += f.values[node] * ku[node];
      }
    }
    return acc;
  }

  double energy(const StateVector& u) const {
    return 0.5 * dirichlet_energy(u) - integral_G(*spec, u);
  }

  double manifold(const StateVector& u) const {
    return dirichlet_energy(u) -
           0.5 * grid->dimension * integral_H(*spec, u);
  }

  std::vector<std::vector<double>> energy_grad(const StateVector& u) const {
    const std::size_t k = u.num_components();
    std::vector<std::vector<double>> grad(k);
    for (std::size_t i = 0; i < k; ++i) grad[i] = stiffness_apply(u.components[i]);
    std::vector<double> point(k), gp(k);
    for (std::size_t node = 0; node + 1 < grid->size(); ++node) {
      const double w = grid->weights[node];
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < k; ++i) point[i] = u.components[i].values[node];
      spec->eval_g(point, gp);
      for (std::size_t i = 0; i < k; ++i) grad[i][node] -= w * gp[i];
    }
    return grad;
  }

  // manifold projection against this discretization, same scheme as the
  // public one: analytic fiber root, then a polish on the resampled value
  std::pair<StateVector, double> project(const StateVector& u, double guess,
                                         double target) const {
    FiberEvaluator fib(u, *spec, dirichlet_energy(u));
    const double s_hat = fiber_root(fib, grid->dimension, guess);
    auto value_at = [&](double s) { return manifold(dilate(u, s)); };
    const double scale = std::max(fib.grad_norm_sq(), 1e-300);
    double s_best = s_hat;
    double f_best = value_at(s_hat);
    if (std::abs(f_best) > target * scale) {
      double a = s_hat, b = s_hat, fa = f_best, fb = f_best;
      for (int expand = 0; fa * fb > 0.0 && expand < 200; ++expand) {
        if (fa > 0.0) {
          b *= 1.02;
          fb = value_at(b);
          if (fb > 0.0) { a = b; fa = fb; }
        } else {
          a /= 1.02;
          fa = value_at(a);
          if (fa < 0.0) { b = a; fb = fa; }
        }
      }
      if (fa * fb > 0.0) {
        throw FiberProjectionError("descent projection: no resampled root near the analytic one");
      }
      for (int it = 0; it < 200; ++it) {
        double f_dummy, fp;
        fib.constraint_with_derivative(s_best, f_dummy, fp);
        double cand = (fp != 0.0) ? s_best - f_best / fp : 0.5 * (a + b);
        if (!(cand > a && cand < b)) cand = 0.5 * (a + b);
        const double fc = value_at(cand);
        if ((fc > 0.0) == (fa > 0.0)) { a = cand; fa = fc; } else { b = cand; fb = fc; }
        s_best = cand;
        f_best = fc;
        if (std::abs(f_best) <= target * scale || (b - a) <= 1e-15 * b) break;
      }
    }
    return {dilate(u, s_best), s_best};
  }
};

// Tangential descent data: the gradient of J with its components along the
// manifold normal and the active ball normals removed by a least-squares
// multiplier fit in the preconditioned metric. The returned direction is
// P^{-1} applied to that residual, so the Armijo slope is exactly pg^2.
struct TangentStep {
  double pg = 0.0;                               // ||residual||_{P^{-1}}
  std::vector<std::vector<double>> direction;    // P^{-1} residual
};

TangentStep tangent_step(const StateVector& u, const NonlinearitySpec& spec,
                         std::span<const double> rho, const DescentOps& ws,
                         const std::vector<std::vector<double>>& grad_j) {
  const auto& grid = *u.grid();
  const std::size_t k = u.num_components();
  const double n = grid.dimension;

  // constraint gradients: always the manifold one, plus active balls
  std::vector<std::vector<std::vector<double>>> cons;  // [c][component][node]
  {
    std::vector<std::vector<double>> grad_m(k);
    std::vector<double> point(k), hp(k);
    for (std::size_t i = 0; i < k; ++i) {
      grad_m[i] = ws.stiffness_apply(u.components[i]);
      for (auto& v : grad_m[i]) v *= 2.0;
    }
    for (std::size_t node = 0; node + 1 < grid.size(); ++node) {
      const double w = grid.weights[node];
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < k; ++i) point[i] = u.components[i].values[node];
      spec.eval_h(point, hp);
      for (std::size_t i = 0; i < k; ++i) grad_m[i][node] -= 0.5 * n * w * hp[i];
    }
    cons.push_back(std::move(grad_m));
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double m = mass(u.components[i]);
    if (m > kZeroMass && m >= rho[i] * rho[i] * (1.0 - 1e-8)) {
      std::vector<std::vector<double>> grad_phi(k);
      for (std::size_t j = 0; j < k; ++j) grad_phi[j].assign(grid.size(), 0.0);
      for (std::size_t node = 0; node + 1 < grid.size(); ++node) {
        grad_phi[i][node] = 2.0 * grid.weights[node] * u.components[i].values[node];
      }
      cons.push_back(std::move(grad_phi));
    }
  }

  const std::size_t nc = cons.size();
  std::vector<std::vector<std::vector<double>>> pinv_cons(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    pinv_cons[c].resize(k);
    for (std::size_t i = 0; i < k; ++i) pinv_cons[c][i] = ws.apply_inverse(cons[c][i]);
  }

  auto dot = [&](const std::vector<std::vector<double>>& a,
                 const std::vector<std::vector<double>>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t node = 0; node < grid.size(); ++node) {
        acc += a[i][node] * b[i][node];
      }
    }
    return acc;
  };

  TangentStep out;
  std::vector<std::vector<double>> pinv_grad(k);
  for (std::size_t i = 0; i < k; ++i) pinv_grad[i] = ws.apply_inverse(grad_j[i]);

  std::vector<std::vector<double>> gram(nc, std::vector<double>(nc));
  std::vector<double> rhs(nc);
  for (std::size_t a = 0; a < nc; ++a) {
    rhs[a] = -dot(cons[a], pinv_grad);
    for (std::size_t b = 0; b <= a; ++b) {
      gram[a][b] = gram[b][a] = dot(cons[a], pinv_cons[b]);
    }
  }
  std::vector<double> coef = rhs;
  auto gram_copy = gram;
  if (!solve_spd(gram_copy, coef)) coef.assign(nc, 0.0);

  // residual = grad + sum coef_c cons_c, direction = P^{-1} residual
  std::vector<std::vector<double>> residual = grad_j;
  out.direction = pinv_grad;
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t node = 0; node < grid.size(); ++node) {
        residual[i][node] += coef[c] * cons[c][i][node];
        out.direction[i][node] += coef[c] * pinv_cons[c][i][node];
      }
    }
  }
  out.pg = std::sqrt(std::max(dot(residual, out.direction), 0.0));
  return out;
}

struct StartOutcome {
  bool usable = false;
  bool converged = false;
  std::string status;
  StateVector state;
  double energy = std::numeric_limits<double>::infinity();
  double pg_norm = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> log;
};

StartOutcome run_single_start(const NonlinearitySpec& spec, const GridPtr& grid,
                              const SolveConfig& cfg, double eta, int start) {
  const int k = spec.num_components();
  StartOutcome out;
  StateVector u = initial_state(grid, k, cfg, start);
  normalize_masses(u, cfg.rho);

  DescentOps ws;
  ws.init(spec, grid);

  double s_guess = 1.0;
  try {
    u = ws.project(u, 1.0, 1e-11).first;
  } catch (const FiberProjectionError& e) {
    out.status = std::string("initial projection failed: ") + e.what();
    return out;
  }

  // In-loop projections run the resampled-constraint polish at a loose
  // target: accurate enough that the current iterate is a fixed point of the
  // trial map to far below Armijo resolution.
  auto cheap_project = [&ws](const StateVector& v, double guess) {
    return ws.project(v, guess, 1e-9);
  };

  double j_u = ws.energy(u);
  bool converged = false;
  double pg = std::numeric_limits<double>::infinity();
  int iter = 0;
  double step_memory = cfg.initial_step;

  for (; iter < cfg.max_iters; ++iter) {
    auto grad = ws.energy_grad(u);
    auto step_data = tangent_step(u, spec, cfg.rho, ws, grad);
    pg = step_data.pg;
    const double m_rel =
        std::abs(ws.manifold(u)) / std::max(ws.dirichlet_energy(u), 1e-300);
    if (cfg.keep_iteration_log) {
      out.log.push_back({iter, j_u, m_rel, pg, 0.0});
    }
    if (pg < cfg.projected_grad_tol * (1.0 + std::abs(j_u))) {
      converged = true;
      break;
    }

    auto& dir = step_data.direction;
    const double slope = pg * pg;
    if (!(slope > 0.0)) {
      out.status = "projected gradient vanished without meeting the tolerance";
      break;
    }

    double step = std::min(cfg.initial_step * 64.0, 2.0 * step_memory);
    bool accepted = false;
    for (int bt = 0; bt < 45; ++bt) {
      StateVector trial = u;
      for (int i = 0; i < k; ++i) {
        for (std::size_t node = 0; node + 1 < grid->size(); ++node) {
          trial.components[i].values[node] -= step * dir[i][node];
        }
      }
      ball_project(trial, cfg.rho);
      try {
        auto [projected, s_star] = cheap_project(trial, s_guess);
        trial = std::move(projected);
      } catch (const FiberProjectionError&) {
        step *= cfg.backtrack_factor;
        continue;
      }
      const double j_trial = ws.energy(trial);
      if (j_trial <= j_u - cfg.armijo_c1 * step * slope) {
        u = std::move(trial);
        clean_vanished_components(u, cfg.rho, 1e-6);
        j_u = ws.energy(u);
        s_guess = 1.0;
        step_memory = step;
        if (cfg.keep_iteration_log) out.log.back().step = step;
        accepted = true;
        break;
      }
      step *= cfg.backtrack_factor;
    }
    if (!accepted) {
      // A stall with a slowly dying component resolves along the
      // semitrivial branch: pin it at zero, re-project, keep going. The
      // multi-start comparison protects against over-eager trimming.
      if (clean_vanished_components(u, cfg.rho, 1e-3)) {
        try {
          auto [projected, s_star] = cheap_project(u, 1.0);
          u = std::move(projected);
          j_u = ws.energy(u);
          step_memory = cfg.initial_step;
          continue;
        } catch (const FiberProjectionError&) {
          out.status = "projection failed after trimming a vanished component";
          break;
        }
      }
      // flat to machine precision along this direction
      converged = pg < 100.0 * cfg.projected_grad_tol * (1.0 + std::abs(j_u));
      if (!converged) out.status = "line search stalled";
      break;
    }

    if (cfg.rearrangement_every > 0 && (iter + 1) % cfg.rearrangement_every == 0 &&
        spec.is_gsp_form()) {
      try {
        auto desc = rearrangement_descent(u, spec);
        const double j_desc = ws.energy(desc.state);
        if (j_desc <= j_u) {
          u = std::move(desc.state);
          j_u = j_desc;
        }
      } catch (const FiberProjectionError&) {
        // keep the current iterate
      }
    }
  }

  // Final polish: drop vanished components and reconcile with the public
  // (centered-difference) manifold. Resampling perturbs the masses at the
  // interpolation-error level, and the multipliers amplify that drift in
  // the complementary-slackness report, so saturated components are snapped
  // back onto their spheres between projections until both settle.
  clean_vanished_components(u, cfg.rho, 1e-6);
  try {
    u = project_to_M(u, spec, eta).state;
    for (int round = 0; round < 8; ++round) {
      bool snapped = false;
      for (std::size_t i = 0; i < u.num_components(); ++i) {
        const double budget = cfg.rho[i] * cfg.rho[i];
        const double m = mass(u.components[i]);
        const bool over = m > budget;
        const bool near_boundary = m > budget * (1.0 - 1e-6) && m < budget;
        if ((over || near_boundary) && std::abs(m - budget) > 1e-13 * budget) {
          const double scale = cfg.rho[i] / std::sqrt(m);
          for (auto& v : u.components[i].values) v *= scale;
          snapped = true;
        }
      }
      if (!snapped) break;
      u = project_to_M(u, spec, eta).state;
    }
  } catch (const FiberProjectionError&) {
    // keep the last iterate; the report will carry its residuals
  }

  {
    auto grad = ws.energy_grad(u);
    pg = tangent_step(u, spec, cfg.rho, ws, grad).pg;
    const double j_final = ws.energy(u);
    if (!converged && pg < cfg.projected_grad_tol * (1.0 + std::abs(j_final))) {
      converged = true;
      out.status.clear();
    }
  }

  out.usable = true;
  out.converged = converged;
  if (converged && out.status.empty()) out.status = "converged";
  if (!converged && out.status.empty()) out.status = "max iterations reached";
  out.energy = energy_J(u, spec);
  out.pg_norm = pg;
  out.iterations = iter;
  out.state = std::move(u);
  return out;
}

}  // namespace

MultiplierExtraction extract_multipliers(const StateVector& u,
                                         const NonlinearitySpec& spec,
                                         std::span<const double> rho) {
  const auto& grid = *u.grid();
  const std::size_t k = u.num_components();
  if (rho.size() != k) {
    throw std::invalid_argument("extract_multipliers: rho size must equal K");
  }
  MultiplierExtraction out;
  out.lambda.assign(k, std::numeric_limits<double>::quiet_NaN());

  std::vector<double> masses(k);
  for (std::size_t i = 0; i < k; ++i) {
    masses[i] = mass(u.components[i]);
    const double floor = std::max(kZeroMass, 1e-9 * rho[i] * rho[i]);
    if (masses[i] >= floor) {
      out.lambda[i] =
          (integral_gi_ui(spec, u, static_cast<int>(i)) - grad_norm_sq(u.components[i])) /
          masses[i];
    }
  }

  // sigma from the 1-D least-squares fit of
  //   r_i(sigma) = -(1-2 sigma) Lap u_i + lambda_i u_i - dG_i + sigma N/2 dH_i
  // with the same interval-based Laplacian whose Euler-Lagrange equation the
  // solver's minimizers satisfy
  const double n = grid.dimension;
  double ab = 0.0, bb = 0.0, aa = 0.0;
  {
    const auto stiffness = detail::radial_h1_operator(grid, 0.0);
    const std::size_t free_dofs = grid.size() - 1;
    std::vector<std::vector<double>> neg_lap(k);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> x(u.components[i].values.begin(),
                            u.components[i].values.begin() + free_dofs);
      neg_lap[i] = stiffness.apply(x);  // (W * -Lap u)_k up to O(h^2)
      neg_lap[i].push_back(0.0);
    }
    std::vector<double> point(k), gp(k), hp(k);
    for (std::size_t node = 1; node + 1 < grid.size(); ++node) {
      const double w = grid.weights[node];
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < k; ++i) point[i] = u.components[i].values[node];
      spec.eval_g(point, gp);
      spec.eval_h(point, hp);
      for (std::size_t i = 0; i < k; ++i) {
        const double lam = std::isnan(out.lambda[i]) ? 0.0 : out.lambda[i];
        const double a = neg_lap[i][node] / w + lam * point[i] - gp[i];
        const double b = -2.0 * neg_lap[i][node] / w + 0.5 * n * hp[i];
        aa += w * a * a;
        ab += w * a * b;
        bb += w * b * b;
      }
    }
  }
  if (bb > 1e-14 * std::max(aa, 1.0)) {
    out.sigma_m = -ab / bb;
  } else {
    out.sigma_m = 0.0;
    out.ill_conditioned = true;
  }

  KktReport kkt;
  kkt.min_lambda = std::numeric_limits<double>::infinity();
  kkt.max_slack = 0.0;
  bool any_lambda = false;
  for (std::size_t i = 0; i < k; ++i) {
    if (std::isnan(out.lambda[i])) continue;
    any_lambda = true;
    kkt.min_lambda = std::min(kkt.min_lambda, out.lambda[i]);
    kkt.max_slack = std::max(
        kkt.max_slack, std::abs(out.lambda[i] * (rho[i] * rho[i] - masses[i])));
  }
  if (!any_lambda) kkt.min_lambda = 0.0;
  kkt.sigma = out.sigma_m;
  kkt.lambda_nonnegative = kkt.min_lambda >= -1e-6;
  kkt.slack_small = kkt.max_slack < 1e-6;
  kkt.sigma_small = std::abs(out.sigma_m) < 1e-4;
  out.kkt = kkt;
  return out;
}

SolutionReport minimize(const NonlinearitySpec& spec, const GridPtr& grid,
                        const SolveConfig& cfg) {
  validate(spec, grid, cfg);
  const int k = spec.num_components();

  SolutionReport report;
  report.state = StateVector(grid, k);

  double eta = 0.0;
  if (!cfg.skip_audit) {
    const auto audit = audit_assumptions(spec);
    eta = audit.eta;
    report.audit_summary = audit.summary();
    report.audit_passed = audit.passes_a1_to_a5();
    if (!report.audit_passed) {
      report.status = "audit failed: " + report.audit_summary;
      return report;
    }
    const auto e2 = check_eta2(spec, cfg.rho,
                               gn_constant(spec.dimension(), spec.l2_critical_exponent()),
                               eta);
    report.eta2_ok = e2.satisfied;
    if (!e2.satisfied) {
      std::ostringstream os;
      os << "smallness condition fails: 2^* C^{2_N} eta |rho|^{4/N} = " << e2.lhs;
      report.status = os.str();
      return report;
    }
  } else {
    eta = estimate_eta(spec);
    report.audit_summary = "audit skipped";
  }

  StartOutcome best;
  std::vector<double> best_masses;
  for (int start = 0; start < cfg.multi_start; ++start) {
    auto outcome = run_single_start(spec, grid, cfg, eta, start);
    if (!outcome.usable) continue;
    std::vector<double> masses(k);
    for (int i = 0; i < k; ++i) masses[i] = mass(outcome.state.components[i]);
    bool take = false;
    if (!best.usable) {
      take = true;
    } else if (outcome.converged != best.converged) {
      take = outcome.converged;
    } else if (std::abs(outcome.energy - best.energy) >
               1e-12 * (1.0 + std::abs(best.energy))) {
      take = outcome.energy < best.energy;
    } else {
      take = std::lexicographical_compare(masses.begin(), masses.end(),
                                          best_masses.begin(), best_masses.end());
    }
    if (take) {
      best_masses = masses;
      const int winning = start;
      best = std::move(outcome);
      report.winning_start = winning;
    }
  }

  if (!best.usable) {
    report.status = best.status.empty() ? "all starts failed to project" : best.status;
    return report;
  }

  report.state = std::move(best.state);
  report.converged = best.converged;
  report.status = best.status;
  report.energy = best.energy;
  report.projected_grad_norm = best.pg_norm;
  report.iterations = best.iterations;
  report.log = std::move(best.log);

  report.masses.resize(k);
  for (int i = 0; i < k; ++i) report.masses[i] = mass(report.state.components[i]);

  auto ext = extract_multipliers(report.state, spec, cfg.rho);
  report.lambda = ext.lambda;
  report.sigma_m = ext.sigma_m;
  report.kkt = ext.kkt;

  std::vector<double> lambda_filled(report.lambda);
  for (auto& l : lambda_filled) {
    if (std::isnan(l)) l = 0.0;
  }
  report.identity = residuals(report.state, lambda_filled, spec);

  report.saturation.resize(k);
  for (int i = 0; i < k; ++i) {
    const double floor = std::max(kZeroMass, 1e-9 * cfg.rho[i] * cfg.rho[i]);
    if (report.masses[i] < floor) {
      report.saturation[i] = Saturation::zero;
    } else if (std::sqrt(report.masses[i]) >= cfg.rho[i] * (1.0 - 1e-3)) {
      report.saturation[i] = Saturation::saturated;
    } else {
      report.saturation[i] = Saturation::interior;
    }
  }

  if (spec.has_critical_part()) {
    report.threshold = threshold_check(spec, cfg.rho, report.energy);
  }
  return report;
}

std::vector<BetaSweepRow> beta_sweep(const NonlinearitySpec& spec_template,
                                     std::span<const double> beta_values,
                                     const GridPtr& grid,
                                     const SolveConfig& config) {
  if (spec_template.num_components() != 2) {
    throw std::invalid_argument("beta_sweep: needs K = 2");
  }
  int coupling_index = -1;
  for (std::size_t t = 0; t < spec_template.terms().size(); ++t) {
    if (std::holds_alternative<CouplingProduct>(spec_template.terms()[t])) {
      if (coupling_index >= 0) {
        throw std::invalid_argument("beta_sweep: needs exactly one coupling term");
      }
      coupling_index = static_cast<int>(t);
    }
  }
  if (coupling_index < 0) {
    throw std::invalid_argument("beta_sweep: template has no coupling term");
  }
  const auto& coupling =
      std::get<CouplingProduct>(spec_template.terms()[coupling_index]);
  const double r_sum = coupling.exponents[0] + coupling.exponents[1];
  if (!(r_sum > spec_template.l2_critical_exponent())) {
    throw std::invalid_argument("beta_sweep: coupling degree must exceed 2_N");
  }
  const double n = spec_template.dimension();
  const double diag_exponent = 0.5 * n * (r_sum - 2.0) - 2.0;

  // scalar reference: the second component's own problem
  std::vector<NonlinearityTerm> scalar_terms;
  for (const auto& term : spec_template.terms()) {
    if (const auto* sp = std::get_if<SeparablePower>(&term)) {
      if (sp->component == 1) scalar_terms.push_back(SeparablePower{0, sp->mu, sp->exponent});
    } else if (const auto* lp = std::get_if<LogPower>(&term)) {
      if (lp->component == 1) scalar_terms.push_back(LogPower{0, lp->mu, lp->exponent});
    } else if (const auto* sc = std::get_if<SobolevCritical>(&term)) {
      if (sc->theta[1] > 0.0) scalar_terms.push_back(SobolevCritical{{sc->theta[1]}});
    }
  }
  NonlinearitySpec scalar_spec(spec_template.dimension(), 1, std::move(scalar_terms));
  SolveConfig scalar_cfg = config;
  scalar_cfg.rho = {config.rho[1]};
  auto scalar_report = minimize(scalar_spec, grid, scalar_cfg);

  StateVector pair_state(grid, 2);
  if (scalar_report.converged) {
    const double ratio = config.rho[0] / config.rho[1];
    pair_state.components[1] = scalar_report.state.components[0];
    pair_state.components[0] = scalar_report.state.components[0];
    for (auto& v : pair_state.components[0].values) v *= ratio;
  }

  std::vector<BetaSweepRow> rows;
  for (double beta : beta_values) {
    BetaSweepRow row;
    row.beta = beta;
    auto terms = spec_template.terms();
    std::get<CouplingProduct>(terms[coupling_index]).beta = beta;
    NonlinearitySpec spec_beta(spec_template.dimension(), 2, std::move(terms));
    try {
      row.report = minimize(spec_beta, grid, config);
      if (scalar_report.converged) {
        auto proj = project_to_M(pair_state, spec_beta);
        row.a_beta = proj.s_star;
        row.bounded_product = beta * std::pow(row.a_beta, diag_exponent);
      }
    } catch (const std::exception& e) {
      row.report.status = std::string("row failed: ") + e.what();
      row.report.converged = false;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace nls
