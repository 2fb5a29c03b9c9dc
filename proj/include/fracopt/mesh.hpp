#ifndef FRACOPT_MESH_HPP
#define FRACOPT_MESH_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fracopt/errors.hpp"

namespace fracopt {

using Point2 = std::array<double, 2>;

// Triangle with newest-vertex bookkeeping: the refinement edge is (v[0], v[1])
// and v[2] is the peak (the newest vertex after a bisection).
struct Triangle {
  std::array<int, 3> v;
  int generation = 0;
  int parent = -1;  // index into the mesh this one was bisected from
};

class BaseMesh {
public:
  std::vector<Point2> vertices;
  std::vector<Triangle> triangles;
  std::vector<std::uint8_t> vertex_boundary;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  int interior_vertex_count() const;

  double signed_area(int t) const;
  double area(int t) const;
  double diameter(int t) const;  // longest edge
  double total_area() const;

  // Is the unordered pair (a,b) on the domain boundary (i.e. shared by
  // exactly one triangle)?
  bool edge_on_boundary(int a, int b) const;

  // Throws ValidationError describing the first violated property: positive
  // orientation, interior edges shared by exactly two triangles, or boundary
  // flags inconsistent with the edge structure.
  void check_conforming() const;
};

struct DomainSpec {
  enum class Kind { UnitSquare, SquareSym, LShape, Polygon };
  Kind kind = Kind::UnitSquare;
  std::vector<Point2> polygon;  // used when kind == Polygon

  // Accepts "unit-square", "square2" (alias "square(-1,1)^2"), "l-shape",
  // or "polygon: x0 y0 x1 y1 ...".
  static DomainSpec parse(const std::string& text);
  std::string name() const;
};

// Coarse triangulation of an axis-aligned domain. The domain is decomposed
// into unit grid squares, each split along its SW-NE diagonal; all refinement
// edges are the diagonals, which makes recursive bisection terminate.
BaseMesh initial_mesh(const DomainSpec& domain);

// Bisects every marked triangle at its refinement edge and restores
// conformity by closure. Unmarked triangles keep parent == their own index.
BaseMesh bisect(const BaseMesh& mesh, std::span<const int> marked);

BaseMesh uniform_refine(const BaseMesh& mesh);

struct IntervalMesh {
  double Y = 1.0;
  double gamma = 1.0;
  std::vector<double> points;  // y_0 = 0 < ... < y_M = Y

  int size() const { return static_cast<int>(points.size()) - 1; }  // M
  double max_h() const;
};

// Graded partition y_l = (l/M)^gamma * Y.
IntervalMesh graded_interval(double Y, int M, double gamma);

// Tensor-product cylinder mesh: base triangulation x graded interval, with
// the weight exponent alpha = 1 - 2s attached.
struct ExtrudedMesh {
  BaseMesh base;
  IntervalMesh interval;
  double alpha = 0.0;

  long cell_count() const {
    return static_cast<long>(base.triangle_count()) * interval.size();
  }
};

ExtrudedMesh extrude(BaseMesh base, IntervalMesh interval, double alpha);

// The 2D support of the local estimator problem at a vertex.
struct Star {
  int center = -1;
  std::vector<int> triangles;
  double h_min = 0.0;  // min{h_K : K contains the center}
};

Star star(const BaseMesh& mesh, int vertex);

// h_Y <= C * h_z' for every vertex z', where h_Y is the largest interval.
bool check_grading(const ExtrudedMesh& mesh, double C);

void write_mesh_text(std::ostream& os, const BaseMesh& mesh);
BaseMesh read_mesh_text(std::istream& is);

// Legacy VTK output of the base mesh with optional per-triangle scalar fields.
void write_vtk(std::ostream& os, const BaseMesh& mesh,
               const std::vector<std::pair<std::string, std::vector<double>>>& cell_fields = {});

}  // namespace fracopt

#endif
