#ifndef FRACOPT_ASSEMBLY_HPP
#define FRACOPT_ASSEMBLY_HPP

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "fracopt/linalg.hpp"
#include "fracopt/mesh.hpp"

namespace fracopt {

// Scalar field on the base domain, evaluated inside a known triangle.
using TraceFn = std::function<double(int tri, double x, double y)>;

// ---- weighted 1D integration ----------------------------------------------

// Closed form of int_{ya}^{yb} y^(alpha+k) dy.
double weighted_moment(double ya, double yb, double alpha, int k);

// int_a^{a+h} y^alpha (y-a)^k dy, evaluated stably also when h << a.
double shifted_weighted_moment(double a, double h, double alpha, int k);

// Per-interval table of int_I y^(alpha+k) dy for k = 0..6.
struct WeightedMomentTable {
  double alpha = 0.0;
  std::vector<std::array<double, 7>> mu;

  static WeightedMomentTable build(const IntervalMesh& interval, double alpha);
};

// 1D shape function as a polynomial in the local coordinate t = y - a.
struct YShape {
  std::array<double, 3> c{};  // c0 + c1 t + c2 t^2
};

YShape y_derivative(const YShape& f);

// Hat functions on (a, a+h): value 1 at the left/right end.
std::array<YShape, 2> hat_shapes(double h);
// Quadratic Lagrange shapes at t = 0, h/2, h.
std::array<YShape, 3> quad_shapes(double h);

// int_a^{a+h} y^alpha f(t) g(t) dy.
double weighted_shape_product(const YShape& f, const YShape& g, double a, double h, double alpha);

// ---- triangle element data -------------------------------------------------

struct TriP1 {
  double area = 0.0;
  double grad[3][2];   // gradients of the barycentric coordinates
  double stiff[3][3];  // int_K grad(l_i) . grad(l_j)
  double mass[3][3];   // int_K l_i l_j
};

TriP1 tri_p1(const BaseMesh& mesh, int t);

// P1 evaluation at a point of triangle t (vertex_values indexed by vertex).
double p1_eval(const BaseMesh& mesh, int t, std::span<const double> vertex_values, double x,
               double y);

double cell_integral(const BaseMesh& mesh, int t, const TraceFn& f, int degree);
double integrate(const BaseMesh& mesh, const TraceFn& f, int degree);

// ---- tensor-product P1 space ----------------------------------------------

// First-degree tensor space on the extruded mesh with the lateral and top
// boundary eliminated. Free dofs are (interior base vertex, level l) for
// l = 0..M-1; the index is base_index(v)*M + l.
class TensorP1Space {
public:
  explicit TensorP1Space(ExtrudedMesh mesh);

  const ExtrudedMesh& mesh() const { return mesh_; }
  const BaseMesh& base() const { return mesh_.base; }
  int levels() const { return mesh_.interval.size(); }
  int free_base_count() const { return n_free_base_; }
  long dof_count() const { return static_cast<long>(n_free_base_) * levels(); }

  int base_index(int vertex) const { return base_index_[vertex]; }
  long dof(int vertex, int level) const {
    if (base_index_[vertex] < 0 || level < 0 || level >= levels()) return -1;
    return static_cast<long>(base_index_[vertex]) * levels() + level;
  }

  // Restriction to y = 0 as per-vertex values (zero on the boundary).
  std::vector<double> trace(std::span<const double> V) const;

private:
  ExtrudedMesh mesh_;
  std::vector<int> base_index_;
  int n_free_base_ = 0;
};

// Stiffness matrix of the weighted form (1/d_s) int y^alpha grad V . grad W
// over the free dofs; integration is exact through tensor separation.
SparseSpd assemble_stiffness(const TensorP1Space& space, double s);

// Load vectors (g, tr W). Only level-0 dofs receive entries.
std::vector<double> assemble_trace_load_p0(const TensorP1Space& space,
                                           std::span<const double> cell_values);
std::vector<double> assemble_trace_load_p1(const TensorP1Space& space,
                                           std::span<const double> vertex_values);
std::vector<double> assemble_trace_load_fn(const TensorP1Space& space, const TraceFn& f,
                                           int degree);

}  // namespace fracopt

#endif
