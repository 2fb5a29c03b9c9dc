#ifndef FRACOPT_ORACLE_HPP
#define FRACOPT_ORACLE_HPP

#include <functional>
#include <vector>

#include "fracopt/errors.hpp"

namespace fracopt {

// d_s = 2^(1-2s) Gamma(1-s) / Gamma(s); d_{1/2} = 1 and d_s * d_{1-s} = 1.
double ds_constant(double s);

// Dirichlet eigenpairs of -Laplace on the rectangle (0,L1) x (0,L2):
// lambda_{k,l} = pi^2 (k^2/L1^2 + l^2/L2^2) with L2-orthonormal sine products.
class RectangleEigenbasis {
public:
  RectangleEigenbasis(double L1, double L2, int k_max = 64);

  double L1() const { return L1_; }
  double L2() const { return L2_; }
  int k_max() const { return k_max_; }
  int mode_count() const { return k_max_ * k_max_; }

  int index(int k, int l) const { return (k - 1) * k_max_ + (l - 1); }  // k,l = 1..k_max
  double eigenvalue(int k, int l) const;
  double eigenfunction(int k, int l, double x1, double x2) const;
  double eval(const std::vector<double>& coeffs, double x1, double x2) const;

private:
  double L1_, L2_;
  int k_max_;
};

// Coefficients of the solution of the spectral problem: u_{k,l} = lambda^{-s} z_{k,l}.
std::vector<double> fractional_solve(const RectangleEigenbasis& basis,
                                     const std::vector<double>& z, double s);

// (f, phi_{k,l}) by tensor Gauss quadrature on a cells x cells grid of the
// rectangle; accurate to ~1e-8 for smooth f with the default resolution.
std::vector<double> project_to_basis(const RectangleEigenbasis& basis,
                                     const std::function<double(double, double)>& f,
                                     int cells = 64);

}  // namespace fracopt

#endif
