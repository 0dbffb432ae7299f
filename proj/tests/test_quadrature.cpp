#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "mbm/quadrature.hpp"

using namespace mbm;

TEST_SUITE("quadrature") {
  TEST_CASE("gauss-legendre integrates polynomials up to degree 2n-1 exactly") {
    for (int order : {1, 2, 4, 8, 16, 32, 64}) {
      const int degree = 2 * order - 1;
      const double value = integrate_gl([&](double x) { return std::pow(x, degree); }, 0.0, 1.0, order);
      CHECK(value == doctest::Approx(1.0 / (degree + 1)).epsilon(1e-13));
    }
  }

  TEST_CASE("weights sum to two and nodes are symmetric") {
    for (int order : {3, 17, 128}) {
      const auto& rule = gauss_legendre(order);
      double sum = 0.0;
      for (double w : rule.weights) sum += w;
      CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        CHECK(rule.nodes[q] == doctest::Approx(-rule.nodes[rule.nodes.size() - 1 - q]).epsilon(1e-14));
      }
    }
    CHECK_THROWS(gauss_legendre(0));
    CHECK_THROWS(gauss_legendre(129));
  }

  TEST_CASE("adaptive bisection handles an endpoint singularity") {
    const double v = integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-12);
    CHECK(v == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
  }

  TEST_CASE("adaptive bisection reports exhaustion") {
    CHECK_THROWS_AS(integrate_adaptive([](double x) { return 1.0 / x; }, 0.0, 1.0, 1e-14, 4, 6), QuadratureError);
  }

  TEST_CASE("compensated sum survives cancellation") {
    CompensatedSum s;
    s += 1.0;
    for (int k = 0; k < 1000; ++k) s += 1e-16;
    s += -1.0;
    CHECK(s.value() == doctest::Approx(1e-13).epsilon(1e-10));
  }

  TEST_CASE("pairwise sum is exact on integers and order dependent only") {
    std::vector<double> v;
    for (int k = 1; k <= 1000; ++k) v.push_back(k);
    CHECK(pairwise_sum(v) == 500500.0);
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  }
}
