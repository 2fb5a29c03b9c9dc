#ifndef FRACOPT_TEST_HELPERS_HPP
#define FRACOPT_TEST_HELPERS_HPP

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "fracopt/linalg.hpp"
#include "fracopt/quadrature.hpp"

namespace fracopt::testing {

// Random SPD matrix A = M^T M + I as dense storage.
inline DenseSpd random_spd(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (auto& v : m) v = u(rng);
  DenseSpd a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = i == j ? 1.0 : 0.0;
      for (int k = 0; k < n; ++k) s += m[k * n + i] * m[k * n + j];
      a.at(i, j) = s;
    }
  return a;
}

inline SparseSpd dense_to_sparse(const DenseSpd& a) {
  std::vector<int> rows, cols;
  std::vector<double> vals;
  for (int i = 0; i < a.dimension(); ++i)
    for (int j = 0; j < a.dimension(); ++j)
      if (a.at(i, j) != 0.0) {
        rows.push_back(i);
        cols.push_back(j);
        vals.push_back(a.at(i, j));
      }
  return SparseSpd::from_triplets(a.dimension(), rows, cols, vals);
}

// Reference quadrature of int_0^h y^alpha f(y) dy on a geometric subdivision
// toward the singular end; accuracy ~1e-13 relative for polynomial f.
inline double weighted_quad_1d(double ya, double yb, double alpha,
                               const std::function<double(double)>& f) {
  const auto line = gauss_line(5);
  double sum = 0.0;
  auto add_panel = [&](double a, double b) {
    for (const auto& q : line) {
      const double y = a + q.x * (b - a);
      sum += (b - a) * q.w * std::pow(y, alpha) * f(y);
    }
  };
  // refine toward ya when ya == 0 (weight singularity), uniform panels after
  const int geometric_levels = 160;
  if (ya == 0.0) {
    double b = yb;
    for (int k = 0; k < geometric_levels; ++k) {
      const double a = b * 0.5;
      // split each geometric panel into 4 for extra sharpness
      for (int j = 0; j < 4; ++j) add_panel(a + (b - a) * j / 4.0, a + (b - a) * (j + 1) / 4.0);
      b = a;
    }
  } else {
    const int panels = 64;
    for (int j = 0; j < panels; ++j)
      add_panel(ya + (yb - ya) * j / panels, ya + (yb - ya) * (j + 1) / panels);
  }
  return sum;
}

// int over the reference triangle of x^i y^j equals i! j! / (i + j + 2)!.
inline double ref_triangle_monomial(int i, int j) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
  };
  return fact(i) * fact(j) / fact(i + j + 2);
}

}  // namespace fracopt::testing

#endif
