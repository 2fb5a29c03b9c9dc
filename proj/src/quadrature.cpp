#include "fracopt/quadrature.hpp"

#include <array>
#include <cmath>

namespace fracopt {

namespace {

std::vector<LinePoint> legendre01(int n) {
  // Closed-form Gauss-Legendre nodes on [-1,1], mapped to [0,1].
  std::vector<LinePoint> pts;
  switch (n) {
    case 3: {
      const double a = std::sqrt(3.0 / 5.0);
      pts = {{-a, 5.0 / 9.0}, {0.0, 8.0 / 9.0}, {a, 5.0 / 9.0}};
      break;
    }
    case 4: {
      const double c = 2.0 / 7.0 * std::sqrt(6.0 / 5.0);
      const double x1 = std::sqrt(3.0 / 7.0 - c);
      const double x2 = std::sqrt(3.0 / 7.0 + c);
      const double w1 = (18.0 + std::sqrt(30.0)) / 36.0;
      const double w2 = (18.0 - std::sqrt(30.0)) / 36.0;
      pts = {{-x2, w2}, {-x1, w1}, {x1, w1}, {x2, w2}};
      break;
    }
    case 5: {
      const double c = 2.0 * std::sqrt(10.0 / 7.0);
      const double x1 = std::sqrt(5.0 - c) / 3.0;
      const double x2 = std::sqrt(5.0 + c) / 3.0;
      const double w0 = 128.0 / 225.0;
      const double w1 = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
      const double w2 = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
      pts = {{-x2, w2}, {-x1, w1}, {0.0, w0}, {x1, w1}, {x2, w2}};
      break;
    }
    default:
      throw UnsupportedDegree("gauss_line supports n in {3,4,5}");
  }
  for (auto& p : pts) {
    p.x = 0.5 * (p.x + 1.0);
    p.w *= 0.5;
  }
  return pts;
}

// Conical product rule via the collapsed-square map x = u, y = v(1-u) with
// Jacobian (1-u). A monomial x^i y^j of total degree <= d pulls back to
// u-degree <= d+1 and v-degree <= d, so nu points exact to 2*nu-1 >= d+1 and
// nv points exact to 2*nv-1 >= d suffice.
std::vector<TrianglePoint> conical(int nu, int nv) {
  const auto gu = legendre01(nu);
  const auto gv = legendre01(nv);
  std::vector<TrianglePoint> pts;
  pts.reserve(gu.size() * gv.size());
  for (const auto& pu : gu)
    for (const auto& pv : gv)
      pts.push_back({pu.x, pv.x * (1.0 - pu.x), pu.w * pv.w * (1.0 - pu.x)});
  return pts;
}

const std::vector<LinePoint> kLine3 = legendre01(3);
const std::vector<LinePoint> kLine4 = legendre01(4);
const std::vector<LinePoint> kLine5 = legendre01(5);
const std::vector<TrianglePoint> kTri4 = conical(3, 3);
const std::vector<TrianglePoint> kTri7 = conical(5, 4);

}  // namespace

std::span<const TrianglePoint> gauss_rule(int degree) {
  if (degree == 4) return kTri4;
  if (degree == 7) return kTri7;
  throw UnsupportedDegree("triangle rule available for degrees 4 and 7 only");
}

std::span<const LinePoint> gauss_line(int n) {
  if (n == 3) return kLine3;
  if (n == 4) return kLine4;
  if (n == 5) return kLine5;
  throw UnsupportedDegree("gauss_line supports n in {3,4,5}");
}

}  // namespace fracopt
