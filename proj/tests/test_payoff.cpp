#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "mbm/gaussian.hpp"
#include "mbm/payoff.hpp"

using namespace mbm;

namespace {

SamplePath make_path(std::vector<double> v) {
  SamplePath p;
  p.values = std::move(v);
  return p;
}

}  // namespace

TEST_SUITE("payoff") {
  TEST_CASE("call payoff") {
    const auto p = make_call_payoff(0.3);
    CHECK(p.psi(0.3) == 0.0);
    CHECK(p.psi(1.3) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.psi_left(0.3) == 0.0);
    CHECK(p.psi_left(0.3 + 1e-12) == 1.0);
    REQUIRE(p.mu_atoms.size() == 1);
    CHECK(p.mu_atoms[0].weight == 0.5);
    for (double x : {-1.0, 0.3, 0.7, 2.0}) {
      for (double y : {-0.5, 0.3, 0.31, 1.5}) {
        CHECK(convexity_identity_rhs(p, x, y) == doctest::Approx(p.psi(x) - p.psi(y) - p.psi_left(y) * (x - y)).epsilon(1e-15));
      }
    }
  }

  TEST_CASE("absolute payoff") {
    const auto p = make_abs_payoff(0.0);
    CHECK(p.psi(0.0) == 0.0);
    CHECK(p.psi_left(0.0) == -1.0);
    CHECK(p.psi_left(1e-300) == 1.0);
    CHECK(p.psi(1.0) - p.psi(-1.0) - p.psi_left(-1.0) * 2.0 == 2.0);
    CHECK(convexity_identity_rhs(p, 1.0, -1.0) == 2.0);
    double mass = 0.0;
    for (const auto& a : p.mu_atoms) mass += a.weight;
    CHECK(mass == 1.0);
  }

  TEST_CASE("quadratic payoff") {
    const auto p = make_quadratic_payoff();
    CHECK(p.psi(2.0) == 2.0);
    CHECK(p.psi_left(2.0) == 2.0);
    CHECK(convexity_identity_rhs(p, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(phi_mass(p) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(std::abs(phi_mass(p) - 0.5 * (1.0 - 2.0 * normal_upper_tail(8.0))) < 1e-13);
  }

  TEST_CASE("riemann sum examples") {
    const auto call = make_call_payoff(0.0);
    CHECK(riemann_sum(make_path({0.0, 0.0, 0.0, 0.0}), call) == 0.0);
    CHECK(riemann_sum(make_path({0.0, 1.0, 0.5}), call) == -0.5);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    std::vector<double> v{0.0};
    for (int k = 0; k < 200; ++k) v.push_back(v.back() + 0.1 * nd(rng));
    long double direct = 0.0L;
    for (std::size_t k = 1; k < v.size(); ++k) direct += static_cast<long double>(v[k - 1]) * (v[k] - v[k - 1]);
    CHECK(riemann_sum(make_path(v), make_quadratic_payoff()) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-13));
  }

  TEST_CASE("exact integral examples") {
    const auto call = make_call_payoff(0.0);
    CHECK(exact_integral(make_path({0.0, 0.0, 0.0}), call) == 0.0);
    CHECK(exact_integral(make_path({0.0, 0.7, 2.0}), call) == 2.0);
    CHECK(exact_integral(make_path({0.0, 0.7, -1.0}), call) == 0.0);
  }

  TEST_CASE("discretization gap examples") {
    const auto call = make_call_payoff(0.0);
    CHECK(discretization_gap(make_path({0.0, 0.0, 0.0}), call) == 0.0);
    CHECK(discretization_gap(make_path({0.0, 1.0, 0.5}), call) == 1.0);
  }

  TEST_CASE("concave integrand triggers the invariant guard") {
    ConvexPayoff bad = make_call_payoff(0.0);
    bad.psi = [](double x) { return -x * x; };
    bad.psi_left = [](double x) { return -2.0 * x; };
    CHECK_THROWS_AS(discretization_gap(make_path({0.0, 1.0, -1.0}), bad), InvariantViolation);
  }

  TEST_CASE("left derivative is nondecreasing") {
    for (const auto& p : {make_call_payoff(0.2), make_abs_payoff(-0.4), make_quadratic_payoff()}) {
      CHECK(psi_nondecreasing(p, -5.0, 5.0));
    }
    ConvexPayoff bad = make_call_payoff(0.0);
    bad.psi_left = [](double x) { return -x; };
    CHECK_FALSE(psi_nondecreasing(bad, -1.0, 1.0));
  }

  TEST_CASE("payoff identifiers") {
    CHECK(make_call_payoff(0.0).id() == "call(a=0)");
    CHECK(make_quadratic_payoff().id() == "quadratic(support=8)");
  }
}
