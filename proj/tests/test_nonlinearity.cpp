#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "nls/nonlinearity.hpp"

using namespace nls;

namespace {

// central finite difference of a scalar function of one component
template <typename F>
double central_diff(F&& f, std::vector<double> u, int i, double rel_eps = 1e-5) {
  const double eps = rel_eps * std::max(std::abs(u[i]), 1.0);
  auto up = u, dn = u;
  up[i] += eps;
  dn[i] -= eps;
  return (f(up) - f(dn)) / (2.0 * eps);
}

}  // namespace

TEST_CASE("separable power point values") {
  NonlinearitySpec spec(3, 1, {SeparablePower{0, 1.0, 4.0}});
  std::vector<double> u{2.0};
  std::vector<double> g(1), h(1);
  CHECK(spec.eval_G(u) == doctest::Approx(4.0).epsilon(1e-14));
  spec.eval_g(u, g);
  CHECK(g[0] * u[0] == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(spec.eval_H(u) == doctest::Approx(8.0).epsilon(1e-14));
  spec.eval_h(u, h);
  CHECK(h[0] == doctest::Approx(2.0 * 4.0 * 2.0).epsilon(1e-14));  // mu(p-2)|t|^{p-2}t
}

TEST_CASE("sobolev critical point values in dimension 3") {
  NonlinearitySpec spec(3, 1, {SobolevCritical{{1.0}}});
  std::vector<double> u{1.0};
  CHECK(spec.sobolev_critical_exponent() == doctest::Approx(6.0));
  CHECK(spec.eval_G(u) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(spec.eval_H(u) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(spec.has_critical_part());
}

TEST_CASE("zero input gives zero values and gradients") {
  NonlinearitySpec spec(3, 2,
                        {SeparablePower{0, 1.0, 4.0}, LogPower{1, 2.0, 4.0},
                         CouplingProduct{1.5, {2.0, 2.0}}, SobolevCritical{{1.0, 2.0}}});
  std::vector<double> u{0.0, 0.0}, g(2, 1.0), h(2, 1.0);
  CHECK(spec.eval_G(u) == 0.0);
  CHECK(spec.eval_H(u) == 0.0);
  spec.eval_g(u, g);
  spec.eval_h(u, h);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  CHECK(h[0] == 0.0);
  CHECK(h[1] == 0.0);
}

TEST_CASE("construction rejects out-of-window terms") {
  // p = 2^* in a separable term must go through SobolevCritical
  CHECK_THROWS_AS(NonlinearitySpec(3, 1, {SeparablePower{0, 1.0, 6.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(NonlinearitySpec(3, 1, {SeparablePower{0, 1.0, 2.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(NonlinearitySpec(3, 1, {SeparablePower{0, -1.0, 4.0}}),
                  std::invalid_argument);
  // log power window [2_N, 2^* - 1]
  CHECK_THROWS_AS(NonlinearitySpec(3, 1, {LogPower{0, 1.0, 3.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(NonlinearitySpec(3, 1, {LogPower{0, 1.0, 5.5}}),
                  std::invalid_argument);
  // coupling needs two strong exponents and total degree in [2_N, 2^*)
  CHECK_THROWS_AS(NonlinearitySpec(3, 2, {CouplingProduct{1.0, {4.0, 0.0}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(NonlinearitySpec(3, 2, {CouplingProduct{1.0, {1.5, 1.5}}}),
                  std::invalid_argument);  // sum below 2_N
  CHECK_THROWS_AS(NonlinearitySpec(3, 2, {CouplingProduct{1.0, {3.0, 3.0}}}),
                  std::invalid_argument);  // sum at 2^*
  CHECK_THROWS_AS(NonlinearitySpec(3, 2, {CouplingProduct{1.0, {0.5, 2.9}}}),
                  std::invalid_argument);  // exponent in (0, 1]
  // theta all zero or all positive
  CHECK_THROWS_AS(NonlinearitySpec(3, 2, {SobolevCritical{{1.0, 0.0}}}),
                  std::invalid_argument);
  CHECK_NOTHROW(NonlinearitySpec(3, 2, {SobolevCritical{{0.0, 0.0}},
                                        SeparablePower{0, 1.0, 4.0},
                                        SeparablePower{1, 1.0, 4.0}}));
  // component index range
  CHECK_THROWS_AS(NonlinearitySpec(3, 1, {SeparablePower{1, 1.0, 4.0}}),
                  std::invalid_argument);
}

TEST_CASE("non-finite input is rejected") {
  NonlinearitySpec spec(3, 1, {SeparablePower{0, 1.0, 4.0}});
  std::vector<double> bad{std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(spec.eval_G(bad), std::invalid_argument);
  std::vector<double> inf{std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(spec.eval_H(inf), std::invalid_argument);
}

TEST_CASE("gradient consistency: g matches dG, h matches dH") {
  std::vector<NonlinearitySpec> specs;
  specs.emplace_back(3, 2, std::vector<NonlinearityTerm>{
                               SeparablePower{0, 1.3, 3.1}, SeparablePower{1, 0.7, 4.8},
                               CouplingProduct{0.9, {2.2, 1.9}},
                               SobolevCritical{{0.8, 1.7}}});
  specs.emplace_back(4, 2, std::vector<NonlinearityTerm>{
                               LogPower{0, 1.1, 3.0}, SeparablePower{1, 2.0, 3.5},
                               CouplingProduct{1.4, {1.6, 1.6}}});
  specs.emplace_back(5, 1, std::vector<NonlinearityTerm>{SeparablePower{0, 1.0, 3.0},
                                                         SobolevCritical{{2.0}}});

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> amp(0.2, 3.0);
  std::bernoulli_distribution flip(0.5);

  for (const auto& spec : specs) {
    const int k = spec.num_components();
    std::vector<double> g(k), h(k);
    for (int sample = 0; sample < 40; ++sample) {
      std::vector<double> u(k);
      for (auto& x : u) x = (flip(rng) ? -1.0 : 1.0) * amp(rng);
      spec.eval_g(u, g);
      spec.eval_h(u, h);
      for (int i = 0; i < k; ++i) {
        const double fd_g =
            central_diff([&](const std::vector<double>& v) { return spec.eval_G(v); }, u, i);
        const double fd_h =
            central_diff([&](const std::vector<double>& v) { return spec.eval_H(v); }, u, i);
        CHECK(g[i] == doctest::Approx(fd_g).epsilon(1e-6));
        CHECK(h[i] == doctest::Approx(fd_h).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("identity H = <g,u> - 2G holds pointwise") {
  NonlinearitySpec spec(3, 2,
                        {SeparablePower{0, 1.0, 4.0}, LogPower{1, 1.0, 4.0},
                         CouplingProduct{2.0, {2.0, 2.0}}, SobolevCritical{{1.0, 0.5}}});
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> amp(-4.0, 4.0);
  std::vector<double> g(2);
  for (int sample = 0; sample < 200; ++sample) {
    std::vector<double> u{amp(rng), amp(rng)};
    spec.eval_g(u, g);
    const double lhs = spec.eval_H(u);
    const double rhs = g[0] * u[0] + g[1] * u[1] - 2.0 * spec.eval_G(u);
    const double scale = std::abs(lhs) + std::abs(rhs) + 1.0;
    CHECK(std::abs(lhs - rhs) / scale < 1e-12);
  }
}

TEST_CASE("gsp-form specs have G >= 0 and H > 0 away from zero") {
  NonlinearitySpec spec(3, 2,
                        {SeparablePower{0, 1.0, 4.0}, SeparablePower{1, 0.5, 3.6},
                         CouplingProduct{1.0, {2.0, 2.0}}});
  CHECK(spec.is_gsp_form());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> amp(-3.0, 3.0);
  for (int sample = 0; sample < 200; ++sample) {
    std::vector<double> u{amp(rng), amp(rng)};
    if (std::abs(u[0]) + std::abs(u[1]) < 1e-6) continue;
    CHECK(spec.eval_G(u) >= 0.0);
    CHECK(spec.eval_H(u) > 0.0);
  }
}

TEST_CASE("integral identities over a state") {
  auto grid = make_grid(3, 8.0, 2000);
  StateVector u(grid, 2);
  for (int i = 0; i < 2; ++i) {
    for (std::size_t node = 0; node + 1 < grid->size(); ++node) {
      const double r = grid->nodes[node];
      u.components[i].values[node] = (i ? -1.2 : 0.8) * std::exp(-0.4 * r * r);
    }
  }
  NonlinearitySpec spec(3, 2,
                        {SeparablePower{0, 1.0, 4.0}, SeparablePower{1, 1.0, 4.0},
                         CouplingProduct{1.0, {2.0, 2.0}}});
  const double ih = integral_H(spec, u);
  const double via_parts = integral_gu(spec, u) - 2.0 * integral_G(spec, u);
  CHECK(ih == doctest::Approx(via_parts).epsilon(1e-13));
  const double gu_sum = integral_gi_ui(spec, u, 0) + integral_gi_ui(spec, u, 1);
  CHECK(gu_sum == doctest::Approx(integral_gu(spec, u)).epsilon(1e-13));
}

TEST_CASE("theta aggregates across critical terms") {
  NonlinearitySpec spec(3, 2,
                        {SobolevCritical{{1.0, 2.0}}, SobolevCritical{{0.5, 0.25}},
                         SeparablePower{0, 1.0, 4.0}, SeparablePower{1, 1.0, 4.0}});
  CHECK(spec.theta()[0] == doctest::Approx(1.5));
  CHECK(spec.theta()[1] == doctest::Approx(2.25));
}
