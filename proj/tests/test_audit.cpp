#include <doctest.h>

#include <cmath>

#include "nls/analysis.hpp"
#include "nls/audit.hpp"

using namespace nls;

namespace {

// the two-component power example with L^2-critical, supercritical, and
// Sobolev-critical parts (dimension 3: 2_N = 10/3, 2^* = 6)
NonlinearitySpec ex2_spec(double nu, double mu, double theta) {
  const double two_n = 2.0 + 4.0 / 3.0;
  std::vector<NonlinearityTerm> terms{
      SeparablePower{0, nu, two_n}, SeparablePower{1, nu, two_n},
      SeparablePower{0, mu, 4.0},   SeparablePower{1, mu, 4.0}};
  if (theta > 0.0) terms.push_back(SobolevCritical{{theta, theta}});
  return NonlinearitySpec(3, 2, std::move(terms));
}

}  // namespace

TEST_CASE("eta estimate recovers max nu / 2_N on the power example") {
  const auto spec = ex2_spec(1.0, 1.0, 1.0);
  const auto rep = audit_assumptions(spec);
  CHECK(rep.eta == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(rep.passes_a1_to_a5());
  CHECK(rep.a4_strict.ok());  // vacuous: theta > 0
}

TEST_CASE("pure L2-critical power fails the strict variant") {
  const double two_n = 2.0 + 4.0 / 3.0;
  NonlinearitySpec spec(3, 1, {SeparablePower{0, 1.0, two_n}});
  const auto rep = audit_assumptions(spec);
  CHECK(rep.a4.ok());  // equality is allowed by (A4)
  CHECK(rep.a4_strict.status == AuditStatus::fail);
  // equality everywhere also stalls the growth required by (A2)
  CHECK_FALSE(rep.a2.ok());
}

TEST_CASE("supercritical power: (A5) margins and full pass") {
  NonlinearitySpec spec(3, 1, {SeparablePower{0, 1.0, 4.0}});
  const auto rep = audit_assumptions(spec);
  // H/G = p - 2 = 2 sits inside [4/3, 4]
  CHECK(rep.a5.ok());
  CHECK(rep.a5.margin > 0.05);
  CHECK(rep.passes_a1_to_a5());
  CHECK(rep.a4_strict.ok());
  CHECK(rep.eta < 1e-6);
}

TEST_CASE("subcritical-at-zero power blows up eta") {
  NonlinearitySpec spec(3, 1, {SeparablePower{0, 1.0, 3.0}});  // p < 10/3
  const auto rep = audit_assumptions(spec);
  CHECK(rep.a1.status == AuditStatus::fail);
}

TEST_CASE("a component without growth fails (A2)") {
  NonlinearitySpec spec(3, 2, {SeparablePower{0, 1.0, 4.0}});
  const auto rep = audit_assumptions(spec);
  CHECK(rep.a2.status == AuditStatus::fail);
}

TEST_CASE("log-power example passes the audit with eta = 0") {
  NonlinearitySpec spec(3, 2, {LogPower{0, 1.0, 4.0}, LogPower{1, 2.0, 3.5}});
  const auto rep = audit_assumptions(spec);
  CHECK(rep.passes_a1_to_a5());
  CHECK(rep.a4_strict.ok());
  CHECK(rep.eta < 1e-3);
  CHECK(rep.c_tilde > 0.0);
  CHECK(std::isfinite(rep.c_tilde));
}

TEST_CASE("positive additivity of the assumptions") {
  const double two_n = 2.0 + 4.0 / 3.0;
  // alpha G + alpha' G' realized by scaling the mu coefficients
  const double alpha = 2.0, alpha_prime = 0.5;
  NonlinearitySpec g1(3, 1, {SeparablePower{0, 1.0, two_n}, SeparablePower{0, 1.0, 4.0}});
  NonlinearitySpec g2(3, 1, {SeparablePower{0, 1.0, 3.8}});
  NonlinearitySpec combined(3, 1,
                            {SeparablePower{0, alpha * 1.0, two_n},
                             SeparablePower{0, alpha * 1.0, 4.0},
                             SeparablePower{0, alpha_prime * 1.0, 3.8}});
  const auto r1 = audit_assumptions(g1);
  const auto r2 = audit_assumptions(g2);
  const auto rc = audit_assumptions(combined);
  REQUIRE(r1.passes_a1_to_a5());
  REQUIRE(r2.passes_a1_to_a5());
  CHECK(rc.passes_a1_to_a5());
  CHECK(rc.a4_strict.ok());
  // sampled limsup estimates carry a small finite-amplitude bias
  CHECK(rc.eta <= alpha * r1.eta + alpha_prime * r2.eta + 1e-3);
}

TEST_CASE("eta2 smallness: trivial and monotone cases") {
  NonlinearitySpec eta_zero(3, 1, {SeparablePower{0, 1.0, 4.0}});
  std::vector<double> rho{123.0};
  const auto ok = check_eta2(eta_zero, rho, 1.0);
  CHECK(ok.satisfied);
  CHECK(ok.margin == doctest::Approx(1.0).epsilon(1e-6));

  const auto spec = ex2_spec(1.0, 1.0, 1.0);
  std::vector<double> small{0.05, 0.05}, huge{50.0, 50.0};
  const double c2n = gn_constant(3, 2.0 + 4.0 / 3.0);
  CHECK(check_eta2(spec, small, c2n).satisfied);
  CHECK_FALSE(check_eta2(spec, huge, c2n).satisfied);
}

TEST_CASE("eta2 flips at the predicted critical radius") {
  const auto spec = ex2_spec(1.0, 1.0, 1.0);
  const double eta = estimate_eta(spec);
  const double two_n = spec.l2_critical_exponent();
  const double c2n = gn_constant(3, two_n);
  // 2^* C^{2_N} eta |rho|^{4/N} = 1  =>  |rho|* = (1/(6 C^{10/3} eta))^{3/4}
  const double rho_star =
      std::pow(1.0 / (6.0 * std::pow(c2n, two_n) * eta), 3.0 / 4.0);
  auto rho_of = [&](double norm) {
    const double per = norm / std::sqrt(2.0);
    return std::vector<double>{per, per};
  };
  CHECK(check_eta2(spec, rho_of(0.99 * rho_star), c2n).satisfied);
  CHECK_FALSE(check_eta2(spec, rho_of(1.01 * rho_star), c2n).satisfied);
}
