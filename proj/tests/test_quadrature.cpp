#include <cmath>
#include <numeric>

#include "doctest.h"
#include "factorcop/quadrature.hpp"

using namespace factorcop;

TEST_CASE("gauss_legendre node and weight structure") {
  for (int n : {2, 5, 25, 49, 61}) {
    auto rule = gauss_legendre(n);
    REQUIRE(rule.size() == n);
    double wsum = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int i = 0; i < n; ++i) {
      CHECK(rule.nodes[i] > 0.0);
      CHECK(rule.nodes[i] < 1.0);
      CHECK(rule.weights[i] > 0.0);
      if (i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
    }
  }
  CHECK_THROWS(gauss_legendre(1));
}

TEST_CASE("exact for polynomials up to degree 2n-1") {
  auto rule = gauss_legendre(25);
  auto integrate = [&](auto f) {
    double s = 0.0;
    for (int i = 0; i < rule.size(); ++i) s += rule.weights[i] * f(rule.nodes[i]);
    return s;
  };
  CHECK(integrate([](double v) { return v; }) == doctest::Approx(0.5).epsilon(1e-14));
  // v^49: exactness boundary for n=25
  CHECK(integrate([](double v) { return std::pow(v, 49); }) ==
        doctest::Approx(0.02).epsilon(1e-13));
  CHECK(integrate([](double v) { return std::exp(v); }) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
}
