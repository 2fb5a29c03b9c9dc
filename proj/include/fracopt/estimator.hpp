#ifndef FRACOPT_ESTIMATOR_HPP
#define FRACOPT_ESTIMATOR_HPP

#include "fracopt/optimizer.hpp"

namespace fracopt {

// Pointwise auxiliary fields built from the adjoint trace: the projected
// subgradient and control surrogates evaluated at arbitrary base points.
class AuxiliaryFields {
public:
  AuxiliaryFields(const BaseMesh& base, std::vector<double> trace_P, const ProblemData& data);

  double lambda_tilde(int tri, double x, double y) const;
  double r_tilde(int tri, double x, double y) const;

private:
  const BaseMesh* base_;
  std::vector<double> trace_P_;
  double sigma_, nu_, a_, b_;
};

// Per-vertex estimator contributions. The star-local values satisfy
// total^2 = E_V^2 + E_P^2 + E_Z^2 + E_Lambda^2 + osc^2.
struct StarReport {
  int vertex = -1;
  int star_size = 0;  // number of triangles containing the vertex
  double E_V = 0.0, E_P = 0.0, E_Z = 0.0, E_Lambda = 0.0, osc = 0.0, total = 0.0;
};

// The star-local Galerkin system in the quadratic tensor space, exposed in
// dense form for cross-solver and quadrature checks. The dof at (base b,
// y-shape j) has index j * base_dofs + b; y-shape 2l / 2l+1 / 2l+2 are the
// endpoint / midpoint / endpoint Lagrange dofs of interval l.
struct LocalSystem {
  int base_dofs = 0;  // per-level count
  int y_dofs = 0;     // 2M free quadratic dofs in y
  std::vector<int> star_triangles;
  // per star triangle: local shape (3 vertex, 3 edge opposite the vertex,
  // bubble) -> base dof or -1
  std::vector<std::array<int, 7>> tri_dof_map;
  DenseSpd A;
  std::vector<double> rhs_state, rhs_adjoint;
};

LocalSystem build_local_system(const TensorP1Space& space, const ControlQuadruple& quad,
                               const ProblemData& data, const Star& st);

// Indicators of one star; solves the two local problems directly.
StarReport star_report(const TensorP1Space& space, const ControlQuadruple& quad,
                       const ProblemData& data, int vertex);

double control_indicator(const BaseMesh& base, int K, double Z_K, const AuxiliaryFields& aux);
double subgradient_indicator(const BaseMesh& base, int K, double Lambda_K,
                             const AuxiliaryFields& aux);

// h_z'^s || f - cellwise mean of f ||_{L2(S_z')}.
double oscillation(const BaseMesh& base, const Star& st, const TraceFn& f, double s);

// max{2, ds^(1/2)+1, ds^(-1/2)(1/nu + 2/sigma + ds^(1/2)), 1}.
double efficiency_constant(double s, double sigma, double nu);

struct EstimateResult {
  std::vector<StarReport> stars;
  std::vector<double> element_sq;  // marking indicators: E_K^2 = sum total^2 / #S
  double E_V = 0.0, E_P = 0.0;      // sqrt of star sums
  double E_Z = 0.0, E_Lambda = 0.0; // sqrt of element sums
  double osc = 0.0;
  double total = 0.0;               // sqrt of the star-total sum
};

EstimateResult estimate(const TensorP1Space& space, const ControlQuadruple& quad,
                        const ProblemData& data, int jobs = 1,
                        bool include_boundary_stars = true);

}  // namespace fracopt

#endif
