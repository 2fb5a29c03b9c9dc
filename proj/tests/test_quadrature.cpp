#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fracopt/quadrature.hpp"
#include "helpers.hpp"

using namespace fracopt;
using fracopt::testing::ref_triangle_monomial;

namespace {

double integrate_monomial(std::span<const TrianglePoint> rule, int i, int j) {
  double s = 0.0;
  for (const auto& q : rule) s += q.w * std::pow(q.x, i) * std::pow(q.y, j);
  return s;
}

}  // namespace

TEST_CASE("degree-4 rule is exact for all monomials up to degree 4") {
  const auto rule = gauss_rule(4);
  for (int i = 0; i + 0 <= 4; ++i)
    for (int j = 0; i + j <= 4; ++j)
      CHECK(integrate_monomial(rule, i, j) ==
            doctest::Approx(ref_triangle_monomial(i, j)).epsilon(1e-14));
}

TEST_CASE("degree-4 rule integrates x^2 y^2 to 1/180") {
  CHECK(integrate_monomial(gauss_rule(4), 2, 2) == doctest::Approx(1.0 / 180.0).epsilon(1e-14));
}

TEST_CASE("degree-7 rule: weights sum to the reference area") {
  double s = 0.0;
  for (const auto& q : gauss_rule(7)) {
    CHECK(q.w > 0.0);
    s += q.w;
  }
  CHECK(s == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("degree-7 rule is exact for all monomials up to degree 7") {
  const auto rule = gauss_rule(7);
  for (int i = 0; i <= 7; ++i)
    for (int j = 0; i + j <= 7; ++j)
      CHECK(integrate_monomial(rule, i, j) ==
            doctest::Approx(ref_triangle_monomial(i, j)).epsilon(1e-13));
}

TEST_CASE("degree-7 rule integrates x^7 to 1/72") {
  // symbolic value: 7! 0! / 9! = 1/72
  CHECK(integrate_monomial(gauss_rule(7), 7, 0) == doctest::Approx(1.0 / 72.0).epsilon(1e-13));
}

TEST_CASE("unsupported degree raises") {
  CHECK_THROWS_AS(gauss_rule(3), UnsupportedDegree);
  CHECK_THROWS_AS(gauss_rule(8), UnsupportedDegree);
}

TEST_CASE("line rules integrate polynomials exactly") {
  for (int n : {3, 4, 5}) {
    const auto rule = gauss_line(n);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double s = 0.0;
      for (const auto& q : rule) s += q.w * std::pow(q.x, d);
      CHECK(s == doctest::Approx(1.0 / (d + 1)).epsilon(1e-14));
    }
  }
}
