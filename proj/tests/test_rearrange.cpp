#include <doctest.h>

#include <cmath>
#include <random>

#include "nls/rearrange.hpp"

using namespace nls;

namespace {

// nonnegative, radially nonincreasing profile with an optional plateau
std::vector<double> monotone_profile(const GridPtr& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(0.5, 2.0), width(0.8, 2.2),
      plateau(0.0, 0.6);
  const double a1 = amp(rng), w1 = width(rng), a2 = amp(rng), w2 = width(rng);
  const double cap = plateau(rng) * (a1 + a2);
  std::vector<double> v(grid->size(), 0.0);
  for (std::size_t k = 0; k + 1 < grid->size(); ++k) {
    const double r = grid->nodes[k];
    const double g = a1 * std::exp(-r * r / (2.0 * w1 * w1)) +
                     a2 * std::exp(-r * r / (2.0 * w2 * w2));
    v[k] = cap > 0.0 ? std::min(g, cap) : g;
  }
  return v;
}

// random contiguous sign blocks on top of a monotone profile
RadialField signed_monotone_field(const GridPtr& grid, std::mt19937_64& rng) {
  auto v = monotone_profile(grid, rng);
  std::uniform_int_distribution<std::size_t> cut(1, grid->size() - 2);
  const std::size_t flips = 1 + rng() % 4;
  for (std::size_t f = 0; f < flips; ++f) {
    const std::size_t from = cut(rng);
    for (std::size_t k = from; k + 1 < grid->size(); ++k) v[k] = -v[k];
  }
  return RadialField(grid, std::move(v));
}

RadialField scrambled_field(const GridPtr& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-1.5, 1.5);
  std::vector<double> v(grid->size(), 0.0);
  for (std::size_t k = 0; k + 1 < grid->size(); ++k) {
    const double r = grid->nodes[k];
    v[k] = std::exp(-0.15 * r * r) *
           (amp(rng) * 0.3 + std::sin(1.7 * r) + 0.5 * std::cos(3.1 * r));
  }
  return RadialField(grid, std::move(v));
}

}  // namespace

TEST_CASE("schwarz: nonincreasing fields are fixed points") {
  auto grid = make_grid(3, 10.0, 3000);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    RadialField u(grid, monotone_profile(grid, rng));
    auto star = schwarz(u);
    for (std::size_t k = 0; k < grid->size(); ++k) {
      CHECK(std::abs(star.values[k] - u.values[k]) <= 1e-12 * (1.0 + u.values[k]));
    }
  }
}

TEST_CASE("schwarz: rearrangement of a negative monotone field recovers |f|") {
  auto grid = make_grid(3, 10.0, 2000);
  std::mt19937_64 rng(12);
  RadialField v(grid, monotone_profile(grid, rng));
  RadialField neg = v;
  for (auto& x : neg.values) x = -x;
  auto star = schwarz(neg);
  for (std::size_t k = 0; k < grid->size(); ++k) {
    CHECK(star.values[k] == doctest::Approx(v.values[k]).epsilon(1e-14));
  }
}

TEST_CASE("schwarz: equimeasurability on sign-block states") {
  auto grid = make_grid(3, 12.0, 4000);
  std::mt19937_64 rng(13);
  const double two_n = 2.0 + 4.0 / 3.0;
  for (int trial = 0; trial < 25; ++trial) {
    auto u = signed_monotone_field(grid, rng);
    auto star = schwarz(u);
    CHECK(mass(star) == doctest::Approx(mass(u)).epsilon(1e-10));
    for (double p : {2.0, two_n, 4.0, 6.0}) {
      CHECK(lp_norm(star, p) == doctest::Approx(lp_norm(u, p)).epsilon(1e-8));
    }
    // monotone output, exactly
    for (std::size_t k = 1; k < grid->size(); ++k) {
      CHECK(star.values[k] <= star.values[k - 1]);
      CHECK(star.values[k] >= 0.0);
    }
    // the sign blocks carry jump energy, so the inequality has real slack here
    CHECK(grad_norm_sq(star) <= grad_norm_sq(u) * (1.0 + 1e-3));
  }
}

TEST_CASE("schwarz: scrambled fields keep measures to resampling accuracy") {
  auto grid = make_grid(3, 12.0, 8000);
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    auto u = scrambled_field(grid, rng);
    auto star = schwarz(u);
    CHECK(mass(star) == doctest::Approx(mass(u)).epsilon(5e-3));
    CHECK(lp_norm(star, 4.0) == doctest::Approx(lp_norm(u, 4.0)).epsilon(5e-3));
    CHECK(grad_norm_sq(star) <= grad_norm_sq(u) * (1.0 + 1e-3));
    for (std::size_t k = 1; k < grid->size(); ++k) {
      CHECK(star.values[k] <= star.values[k - 1]);
    }
  }
}

TEST_CASE("rearrangement descent: symmetric-decreasing manifold states are fixed") {
  auto grid = make_grid(3, 12.0, 6000);
  NonlinearitySpec spec(3, 1, {SeparablePower{0, 1.0, 4.0}});
  StateVector u(grid, 1);
  for (std::size_t k = 0; k + 1 < grid->size(); ++k) {
    const double r = grid->nodes[k];
    u.components[0].values[k] = 1.3 * std::exp(-r * r / 2.0);
  }
  auto on_m = project_to_M(u, spec).state;
  const double j0 = energy_J(on_m, spec);

  auto desc = rearrangement_descent(on_m, spec);
  CHECK(desc.a == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(desc.certificate.j_after_projected == doctest::Approx(j0).epsilon(1e-6));
  CHECK(desc.certificate.m_after <= desc.certificate.m_before + 1e-8);
}

TEST_CASE("rearrangement descent: sign flip does not change the energy") {
  auto grid = make_grid(3, 12.0, 6000);
  NonlinearitySpec spec(3, 1, {SeparablePower{0, 1.0, 4.0}});
  StateVector u(grid, 1);
  for (std::size_t k = 0; k + 1 < grid->size(); ++k) {
    const double r = grid->nodes[k];
    u.components[0].values[k] = 1.3 * std::exp(-r * r / 2.0);
  }
  auto positive = project_to_M(u, spec).state;
  const double j_positive = energy_J(positive, spec);

  StateVector flipped = positive;
  for (auto& v : flipped.components[0].values) v = -v;
  auto desc = rearrangement_descent(flipped, spec);
  CHECK(desc.certificate.j_after_projected ==
        doctest::Approx(j_positive).epsilon(1e-6));
}

TEST_CASE("rearrangement descent: coupling integrals do not decrease") {
  auto grid = make_grid(3, 12.0, 4000);
  NonlinearitySpec spec(3, 2,
                        {SeparablePower{0, 1.0, 4.0}, SeparablePower{1, 1.0, 4.0},
                         CouplingProduct{1.0, {2.0, 2.0}}});
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<RadialField> comps{scrambled_field(grid, rng),
                                   scrambled_field(grid, rng)};
    StateVector u(std::move(comps));
    auto desc = rearrangement_descent(u, spec);
    REQUIRE(desc.certificate.coupling_before.size() == 1);
    CHECK(desc.certificate.coupling_after[0] >=
          desc.certificate.coupling_before[0] - 1e-8);
    CHECK(desc.a > 0.0);
  }
}

TEST_CASE("rearrangement descent: certificate numbers on sign-block states") {
  auto grid = make_grid(3, 12.0, 4000);
  NonlinearitySpec spec(3, 1, {SeparablePower{0, 1.0, 4.0}});
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 6; ++trial) {
    StateVector u(grid, 1);
    u.components[0] = signed_monotone_field(grid, rng);
    auto desc = rearrangement_descent(u, spec);
    const auto& cert = desc.certificate;
    CHECK(cert.mass_after[0] == doctest::Approx(cert.mass_before[0]).epsilon(1e-10));
    CHECK(cert.grad_after[0] <= cert.grad_before[0] * (1.0 + 1e-3));
    CHECK(cert.m_after <= cert.m_before + 1e-8 * (1.0 + std::abs(cert.m_before)));
  }
}

TEST_CASE("rearrangement descent: manifold inputs keep a <= 1 and do not raise J") {
  auto grid = make_grid(3, 12.0, 4000);
  NonlinearitySpec spec(3, 1, {SeparablePower{0, 1.0, 4.0}});
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    // a monotone profile stays monotone under the projection dilation, and a
    // whole-component sign flip leaves |u| untouched
    StateVector seed(grid, 1);
    seed.components[0] = RadialField(grid, monotone_profile(grid, rng));
    auto on_m = project_to_M(seed, spec).state;
    StateVector flipped = on_m;
    for (auto& v : flipped.components[0].values) v = -v;

    auto desc = rearrangement_descent(flipped, spec);
    const auto& cert = desc.certificate;
    CHECK(cert.a <= 1.0 + 1e-9);
    CHECK(cert.j_after_projected <=
          energy_J(on_m, spec) + 1e-6 * std::abs(energy_J(on_m, spec)));
  }
}
