#include "fracopt/oracle.hpp"

#include <cmath>
#include <numbers>

#include "fracopt/quadrature.hpp"

namespace fracopt {

double ds_constant(double s) {
  if (s <= 0.0 || s >= 1.0) throw InvalidOrder("ds_constant: s must lie in (0,1)");
  return std::exp2(1.0 - 2.0 * s) * std::exp(std::lgamma(1.0 - s) - std::lgamma(s));
}

RectangleEigenbasis::RectangleEigenbasis(double L1, double L2, int k_max)
    : L1_(L1), L2_(L2), k_max_(k_max) {
  if (L1 <= 0.0 || L2 <= 0.0) throw ValidationError("eigenbasis: side lengths must be positive");
  if (k_max < 1) throw ValidationError("eigenbasis: mode cutoff must be at least 1");
}

double RectangleEigenbasis::eigenvalue(int k, int l) const {
  const double pi = std::numbers::pi;
  return pi * pi * (k * k / (L1_ * L1_) + l * l / (L2_ * L2_));
}

double RectangleEigenbasis::eigenfunction(int k, int l, double x1, double x2) const {
  const double pi = std::numbers::pi;
  return 2.0 / std::sqrt(L1_ * L2_) * std::sin(k * pi * x1 / L1_) * std::sin(l * pi * x2 / L2_);
}

double RectangleEigenbasis::eval(const std::vector<double>& coeffs, double x1, double x2) const {
  double sum = 0.0;
  for (int k = 1; k <= k_max_; ++k)
    for (int l = 1; l <= k_max_; ++l) {
      const double c = coeffs[index(k, l)];
      if (c != 0.0) sum += c * eigenfunction(k, l, x1, x2);
    }
  return sum;
}

std::vector<double> fractional_solve(const RectangleEigenbasis& basis,
                                     const std::vector<double>& z, double s) {
  if (static_cast<int>(z.size()) != basis.mode_count())
    throw DimensionMismatch("fractional_solve: coefficient count mismatch");
  std::vector<double> u(z.size());
  for (int k = 1; k <= basis.k_max(); ++k)
    for (int l = 1; l <= basis.k_max(); ++l) {
      const int i = basis.index(k, l);
      u[i] = std::pow(basis.eigenvalue(k, l), -s) * z[i];
    }
  return u;
}

std::vector<double> project_to_basis(const RectangleEigenbasis& basis,
                                     const std::function<double(double, double)>& f, int cells) {
  const auto line = gauss_line(5);
  const double pi = std::numbers::pi;
  const double hx = basis.L1() / cells, hy = basis.L2() / cells;
  const int kmax = basis.k_max();
  const int npt = cells * static_cast<int>(line.size());

  // Tabulate the 1D quadrature points, weights, and sine factors once.
  std::vector<double> xs(npt), ys(npt), wx(npt), wy(npt);
  std::vector<double> sx(static_cast<std::size_t>(npt) * kmax), sy(sx.size());
  for (int c = 0, i = 0; c < cells; ++c)
    for (const auto& q : line) {
      xs[i] = (c + q.x) * hx;
      ys[i] = (c + q.x) * hy;
      wx[i] = q.w * hx;
      wy[i] = q.w * hy;
      for (int k = 1; k <= kmax; ++k) {
        sx[static_cast<std::size_t>(i) * kmax + k - 1] = std::sin(k * pi * xs[i] / basis.L1());
        sy[static_cast<std::size_t>(i) * kmax + k - 1] = std::sin(k * pi * ys[i] / basis.L2());
      }
      ++i;
    }

  const double scale = 2.0 / std::sqrt(basis.L1() * basis.L2());
  std::vector<double> coeffs(basis.mode_count(), 0.0);
  for (int i = 0; i < npt; ++i)
    for (int j = 0; j < npt; ++j) {
      const double w = wx[i] * wy[j] * scale * f(xs[i], ys[j]);
      if (w == 0.0) continue;
      const double* sxi = &sx[static_cast<std::size_t>(i) * kmax];
      const double* syj = &sy[static_cast<std::size_t>(j) * kmax];
      for (int k = 0; k < kmax; ++k) {
        const double a = w * sxi[k];
        double* row = &coeffs[static_cast<std::size_t>(k) * kmax];
        for (int l = 0; l < kmax; ++l) row[l] += a * syj[l];
      }
    }
  return coeffs;
}

}  // namespace fracopt
