#include <doctest.h>

#include <cmath>
#include <random>

#include "nls/solver.hpp"

using namespace nls;

namespace {

NonlinearitySpec quartic(int k = 1) {
  std::vector<NonlinearityTerm> terms;
  for (int i = 0; i < k; ++i) terms.push_back(SeparablePower{i, 1.0, 4.0});
  return NonlinearitySpec(3, k, std::move(terms));
}

SolveConfig tight_config(std::vector<double> rho) {
  SolveConfig cfg;
  cfg.rho = std::move(rho);
  cfg.multi_start = 4;
  cfg.max_iters = 1500;
  cfg.projected_grad_tol = 1e-7;
  cfg.init_widths = {0.3, 0.8, 1.5, 0.15};
  return cfg;
}

// forward-difference Dirichlet energy matching the solver's internal
// discretization, for stationarity checks
double interval_energy_j(const StateVector& u, const NonlinearitySpec& spec) {
  const auto& grid = *u.grid();
  const double h = grid.spacing;
  const double omega =
      grid.weights[1] / (h * std::pow(grid.nodes[1], grid.dimension - 1));
  double dirichlet = 0.0;
  for (const auto& f : u.components) {
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      const double rm = 0.5 * (grid.nodes[k] + grid.nodes[k + 1]);
      const double face = omega * std::pow(rm, grid.dimension - 1) * h;
      const double d = (f.values[k + 1] - f.values[k]) / h;
      dirichlet += face * d * d;
    }
  }
  return 0.5 * dirichlet - integral_G(spec, u);
}

}  // namespace

TEST_CASE("scalar quartic solve: invariants of an accepted report") {
  auto grid = make_grid(3, 2.0, 2500);
  const auto spec = quartic();
  auto cfg = tight_config({1.0});
  cfg.init_widths = {0.05, 0.1, 0.2, 0.4};
  auto rep = minimize(spec, grid, cfg);

  REQUIRE(rep.converged);
  CHECK(rep.energy > 0.0);
  CHECK(std::abs(rep.identity.M_value) < 1e-8);
  CHECK(rep.masses[0] <= 1.0 + 1e-10);
  CHECK(rep.saturation[0] == Saturation::saturated);
  CHECK(rep.lambda[0] > 0.0);
  CHECK(rep.kkt.ok());
  CHECK(rep.audit_passed);
  CHECK(rep.eta2_ok);

  // descent property along the accepted iterations
  for (std::size_t i = 1; i < rep.log.size(); ++i) {
    CHECK(rep.log[i].energy <= rep.log[i - 1].energy + 1e-12);
  }
}

TEST_CASE("energy grows as the mass budget shrinks (theta = 0)") {
  const auto spec = quartic();
  auto solve_at = [&](double rho) {
    const double width = rho * rho / 18.9;  // soliton scale
    auto grid = make_grid(3, 28.0 * width, 2400);
    auto cfg = tight_config({rho});
    cfg.init_widths = {width, 2.0 * width, 4.0 * width, 0.5 * width};
    return minimize(spec, grid, cfg);
  };
  auto big = solve_at(0.8);
  auto small = solve_at(0.1);
  REQUIRE(big.converged);
  REQUIRE(small.converged);
  // c(rho) ~ rho^{-2} for the cubic soliton
  CHECK(small.energy > 10.0 * big.energy);
}

TEST_CASE("decoupled additivity and the semitrivial minimum") {
  auto grid = make_grid(3, 2.0, 2500);
  auto cfg1 = tight_config({1.0});
  cfg1.init_widths = {0.05, 0.1, 0.2, 0.4};
  const auto scalar_spec = quartic(1);
  auto scalar = minimize(scalar_spec, grid, cfg1);
  REQUIRE(scalar.converged);

  // additivity: the symmetric pair built from the scalar minimizer carries
  // exactly twice the energy and sits on the joint manifold
  const auto pair_spec = quartic(2);
  StateVector sym(grid, 2);
  sym.components[0] = scalar.state.components[0];
  sym.components[1] = scalar.state.components[0];
  CHECK(energy_J(sym, pair_spec) ==
        doctest::Approx(2.0 * scalar.energy).epsilon(1e-12));
  CHECK(std::abs(constraint_M(sym, pair_spec)) < 1e-9 * grad_norm_sq(sym));

  // the global minimum of the decoupled pair problem is semitrivial and
  // matches the scalar value
  auto cfg2 = tight_config({1.0, 1.0});
  cfg2.init_widths = {0.05, 0.1, 0.2, 0.4};
  cfg2.multi_start = 6;
  auto pair = minimize(pair_spec, grid, cfg2);
  REQUIRE(pair.converged);
  CHECK(pair.energy == doctest::Approx(scalar.energy).epsilon(1e-4));
  int zeros = 0, saturated = 0;
  for (auto s : pair.saturation) {
    if (s == Saturation::zero) ++zeros;
    if (s == Saturation::saturated) ++saturated;
  }
  CHECK(zeros == 1);
  CHECK(saturated == 1);
}

TEST_CASE("multiplier extraction is even in each component") {
  auto grid = make_grid(3, 9.0, 1500);
  const auto spec = quartic(2);
  StateVector u(grid, 2);
  for (int i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k + 1 < grid->size(); ++k) {
      const double r = grid->nodes[k];
      u.components[i].values[k] = (1.0 + 0.3 * i) * std::exp(-r * r);
    }
  }
  std::vector<double> rho{1.0, 1.0};
  auto base = extract_multipliers(u, spec, rho);
  StateVector flipped = u;
  for (auto& v : flipped.components[1].values) v = -v;
  auto after = extract_multipliers(flipped, spec, rho);
  CHECK(after.lambda[0] == doctest::Approx(base.lambda[0]).epsilon(1e-13));
  CHECK(after.lambda[1] == doctest::Approx(base.lambda[1]).epsilon(1e-13));
  CHECK(after.sigma_m == doctest::Approx(base.sigma_m).epsilon(1e-10));
}

TEST_CASE("stationarity of the lagrangian at convergence") {
  auto grid = make_grid(3, 2.0, 2500);
  const auto spec = quartic();
  auto cfg = tight_config({1.0});
  cfg.init_widths = {0.05, 0.1, 0.2, 0.4};
  auto rep = minimize(spec, grid, cfg);
  REQUIRE(rep.converged);

  auto lagrangian = [&](const StateVector& v) {
    double acc = interval_energy_j(v, spec);
    for (std::size_t i = 0; i < v.num_components(); ++i) {
      acc += 0.5 * rep.lambda[i] * mass(v.components[i]);
    }
    return acc;
  };

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> widths(0.03, 0.3), amps(-1.0, 1.0);
  int pass = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    StateVector dir(grid, 1);
    const double w = widths(rng), a = amps(rng);
    for (std::size_t k = 0; k + 1 < grid->size(); ++k) {
      const double r = grid->nodes[k];
      dir.components[0].values[k] = a * std::exp(-r * r / (2.0 * w * w));
    }
    const double eps = 1e-6;
    StateVector up = rep.state, dn = rep.state;
    for (std::size_t k = 0; k + 1 < grid->size(); ++k) {
      up.components[0].values[k] += eps * dir.components[0].values[k];
      dn.components[0].values[k] -= eps * dir.components[0].values[k];
    }
    const double deriv = (lagrangian(up) - lagrangian(dn)) / (2.0 * eps);
    // scale of the two cancelling first-order contributions
    const double scale =
        std::abs(rep.lambda[0]) *
            std::abs(inner_l2(rep.state.components[0], dir.components[0])) +
        1e-12;
    if (std::abs(deriv) < 1e-4 * std::max(scale, 1.0)) ++pass;
  }
  CHECK(pass == trials);
}

TEST_CASE("failures are reported, never silent") {
  auto grid = make_grid(3, 9.0, 400);
  const auto spec = quartic();
  auto cfg = tight_config({1.0});
  cfg.max_iters = 2;
  cfg.multi_start = 1;
  auto rep = minimize(spec, grid, cfg);
  if (!rep.converged) {
    CHECK_FALSE(rep.status.empty());
    CHECK(rep.status != "converged");
  }
}

TEST_CASE("audit gate refuses assumption-violating specs") {
  // p = 3 < 2_N: the 2_N-ratio blows up at zero, (A1) fails
  NonlinearitySpec bad(3, 1, {SeparablePower{0, 1.0, 3.0}});
  auto grid = make_grid(3, 9.0, 400);
  auto cfg = tight_config({1.0});
  auto rep = minimize(bad, grid, cfg);
  CHECK_FALSE(rep.converged);
  CHECK_FALSE(rep.audit_passed);
  CHECK(rep.status.find("audit") != std::string::npos);

  cfg.skip_audit = true;
  auto forced = minimize(bad, grid, cfg);
  CHECK(forced.audit_summary == "audit skipped");
}

TEST_CASE("smallness gate reports an eta2 violation") {
  const double two_n = 2.0 + 4.0 / 3.0;
  NonlinearitySpec crit_at_zero(3, 1, {SeparablePower{0, 1.0, two_n},
                                       SeparablePower{0, 1.0, 4.0}});
  auto grid = make_grid(3, 9.0, 400);
  auto cfg = tight_config({50.0});  // far beyond the smallness radius
  auto rep = minimize(crit_at_zero, grid, cfg);
  CHECK_FALSE(rep.converged);
  CHECK(rep.audit_passed);
  CHECK_FALSE(rep.eta2_ok);
  CHECK(rep.status.find("smallness") != std::string::npos);
}

TEST_CASE("beta sweep validates its template") {
  auto grid = make_grid(3, 9.0, 400);
  auto cfg = tight_config({1.0, 1.0});
  std::vector<double> betas{0.0, 1.0};

  CHECK_THROWS_AS(beta_sweep(quartic(2), betas, grid, cfg), std::invalid_argument);

  const double half_critical = (2.0 + 4.0 / 3.0) / 2.0;
  NonlinearitySpec low_degree(3, 2,
                              {SeparablePower{0, 1.0, 4.0}, SeparablePower{1, 1.0, 4.0},
                               CouplingProduct{1.0, {half_critical, half_critical}}});
  CHECK_THROWS_AS(beta_sweep(low_degree, betas, grid, cfg), std::invalid_argument);

  NonlinearitySpec one_comp = quartic(1);
  SolveConfig cfg1 = cfg;
  cfg1.rho = {1.0};
  CHECK_THROWS_AS(beta_sweep(one_comp, betas, grid, cfg1), std::invalid_argument);
}
