#ifndef FRACOPT_QUADRATURE_HPP
#define FRACOPT_QUADRATURE_HPP

#include <span>
#include <vector>

#include "fracopt/errors.hpp"

namespace fracopt {

// Quadrature node on the reference triangle {x >= 0, y >= 0, x + y <= 1}.
// Weights sum to 1/2 (the reference area).
struct TrianglePoint {
  double x, y, w;
};

// Positive-weight conical-product rule exact for polynomials of the given
// total degree. Supported degrees: 4 and 7.
std::span<const TrianglePoint> gauss_rule(int degree);

// Gauss-Legendre nodes/weights on [0,1], n in {3,4,5}.
struct LinePoint {
  double x, w;
};
std::span<const LinePoint> gauss_line(int n);

}  // namespace fracopt

#endif
