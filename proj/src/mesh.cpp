#include "fracopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace fracopt {

namespace {

using Edge = std::pair<int, int>;

Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::map<Edge, std::vector<int>> edge_table(const BaseMesh& mesh) {
  std::map<Edge, std::vector<int>> edges;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& v = mesh.triangles[t].v;
    for (int e = 0; e < 3; ++e) edges[make_edge(v[e], v[(e + 1) % 3])].push_back(t);
  }
  return edges;
}

double dist(const Point2& a, const Point2& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

int BaseMesh::interior_vertex_count() const {
  int n = 0;
  for (auto f : vertex_boundary) n += f ? 0 : 1;
  return n;
}

double BaseMesh::signed_area(int t) const {
  const auto& v = triangles[t].v;
  const Point2 &a = vertices[v[0]], &b = vertices[v[1]], &c = vertices[v[2]];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

double BaseMesh::area(int t) const { return std::abs(signed_area(t)); }

double BaseMesh::diameter(int t) const {
  const auto& v = triangles[t].v;
  double h = 0.0;
  for (int e = 0; e < 3; ++e)
    h = std::max(h, dist(vertices[v[e]], vertices[v[(e + 1) % 3]]));
  return h;
}

double BaseMesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < triangle_count(); ++t) s += area(t);
  return s;
}

bool BaseMesh::edge_on_boundary(int a, int b) const {
  int count = 0;
  for (int t = 0; t < triangle_count(); ++t) {
    const auto& v = triangles[t].v;
    for (int e = 0; e < 3; ++e) {
      if (make_edge(v[e], v[(e + 1) % 3]) == make_edge(a, b)) ++count;
    }
  }
  return count == 1;
}

void BaseMesh::check_conforming() const {
  for (int t = 0; t < triangle_count(); ++t) {
    if (signed_area(t) <= 0.0)
      throw ValidationError("triangle " + std::to_string(t) + " is not positively oriented");
  }
  const auto edges = edge_table(*this);
  std::vector<std::uint8_t> on_bdry(vertices.size(), 0);
  for (const auto& [e, ts] : edges) {
    if (ts.size() > 2)
      throw ValidationError("edge shared by more than two triangles");
    if (ts.size() == 1) {
      on_bdry[e.first] = 1;
      on_bdry[e.second] = 1;
    }
  }
  // A hanging node sits in the interior of some triangle's edge: detect as a
  // vertex of one triangle lying strictly inside an edge of a neighbor.
  for (const auto& [e, ts] : edges) {
    const Point2 &a = vertices[e.first], &b = vertices[e.second];
    for (int w = 0; w < vertex_count(); ++w) {
      if (w == e.first || w == e.second) continue;
      const Point2& p = vertices[w];
      const double cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
      const double len = dist(a, b);
      if (std::abs(cross) > 1e-12 * len * len) continue;
      const double dot = (b[0] - a[0]) * (p[0] - a[0]) + (b[1] - a[1]) * (p[1] - a[1]);
      if (dot > 1e-12 && dot < len * len * (1.0 - 1e-12))
        throw ValidationError("hanging node detected on an edge");
    }
  }
  for (int v = 0; v < vertex_count(); ++v) {
    if (vertex_boundary[v] != on_bdry[v])
      throw ValidationError("boundary flag of vertex " + std::to_string(v) +
                            " disagrees with the edge structure");
  }
}

DomainSpec DomainSpec::parse(const std::string& text) {
  DomainSpec d;
  if (text == "unit-square") {
    d.kind = Kind::UnitSquare;
  } else if (text == "square2" || text == "square(-1,1)^2") {
    d.kind = Kind::SquareSym;
  } else if (text == "l-shape") {
    d.kind = Kind::LShape;
  } else if (text.rfind("polygon:", 0) == 0) {
    d.kind = Kind::Polygon;
    std::istringstream is(text.substr(8));
    double x, y;
    while (is >> x >> y) d.polygon.push_back({x, y});
    if (d.polygon.size() < 3) throw UnsupportedDomain("polygon needs at least 3 vertices");
  } else {
    throw UnsupportedDomain("unknown domain '" + text + "'");
  }
  return d;
}

std::string DomainSpec::name() const {
  switch (kind) {
    case Kind::UnitSquare: return "unit-square";
    case Kind::SquareSym: return "square2";
    case Kind::LShape: return "l-shape";
    case Kind::Polygon: {
      std::string s = "polygon:";
      char buf[64];
      for (const auto& p : polygon) {
        std::snprintf(buf, sizeof buf, " %.17g %.17g", p[0], p[1]);
        s += buf;
      }
      return s;
    }
  }
  return "?";
}

namespace {

std::vector<Point2> domain_polygon(const DomainSpec& d) {
  switch (d.kind) {
    case DomainSpec::Kind::UnitSquare:
      return {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    case DomainSpec::Kind::SquareSym:
      return {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    case DomainSpec::Kind::LShape:
      return {{-1, -1}, {0, -1}, {0, 0}, {1, 0}, {1, 1}, {-1, 1}};
    case DomainSpec::Kind::Polygon:
      return d.polygon;
  }
  return {};
}

bool point_in_polygon(const std::vector<Point2>& poly, double x, double y) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& pi = poly[i];
    const auto& pj = poly[j];
    if ((pi[1] > y) != (pj[1] > y)) {
      const double xc = (pj[0] - pi[0]) * (y - pi[1]) / (pj[1] - pi[1]) + pi[0];
      if (x < xc) inside = !inside;
    }
  }
  return inside;
}

double polygon_area(const std::vector<Point2>& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    s += poly[j][0] * poly[i][1] - poly[i][0] * poly[j][1];
  return 0.5 * s;
}

}  // namespace

BaseMesh initial_mesh(const DomainSpec& domain) {
  const auto poly = domain_polygon(domain);
  // The domain must decompose into unit grid squares.
  for (const auto& p : poly) {
    if (std::abs(p[0] - std::round(p[0])) > 1e-12 || std::abs(p[1] - std::round(p[1])) > 1e-12)
      throw UnsupportedDomain("polygon vertices must lie on the integer grid");
  }
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    if (std::abs(a[0] - b[0]) > 1e-12 && std::abs(a[1] - b[1]) > 1e-12)
      throw UnsupportedDomain("polygon edges must be axis-aligned");
  }
  const double par = polygon_area(poly);
  if (par <= 0.0)
    throw UnsupportedDomain("polygon must be simple with positive (counterclockwise) area");

  int x0 = INT32_MAX, x1 = INT32_MIN, y0 = INT32_MAX, y1 = INT32_MIN;
  for (const auto& p : poly) {
    x0 = std::min(x0, static_cast<int>(std::lround(p[0])));
    x1 = std::max(x1, static_cast<int>(std::lround(p[0])));
    y0 = std::min(y0, static_cast<int>(std::lround(p[1])));
    y1 = std::max(y1, static_cast<int>(std::lround(p[1])));
  }

  std::vector<std::pair<int, int>> cells;  // SW corners of covered unit squares
  for (int i = x0; i < x1; ++i)
    for (int j = y0; j < y1; ++j)
      if (point_in_polygon(poly, i + 0.5, j + 0.5)) cells.emplace_back(i, j);

  if (std::abs(par - static_cast<double>(cells.size())) > 1e-9)
    throw UnsupportedDomain("polygon is not a union of unit grid squares");

  BaseMesh mesh;
  std::map<std::pair<int, int>, int> vid;
  auto vertex = [&](int i, int j) {
    auto it = vid.find({i, j});
    if (it != vid.end()) return it->second;
    const int id = mesh.vertex_count();
    vid[{i, j}] = id;
    mesh.vertices.push_back({static_cast<double>(i), static_cast<double>(j)});
    return id;
  };

  for (const auto& [i, j] : cells) {
    const int sw = vertex(i, j), se = vertex(i + 1, j);
    const int ne = vertex(i + 1, j + 1), nw = vertex(i, j + 1);
    // SW-NE diagonal is the refinement edge of both halves.
    mesh.triangles.push_back({{ne, sw, se}, 0, -1});
    mesh.triangles.push_back({{sw, ne, nw}, 0, -1});
  }

  mesh.vertex_boundary.assign(mesh.vertex_count(), 0);
  for (const auto& [e, ts] : edge_table(mesh)) {
    if (ts.size() == 1) {
      mesh.vertex_boundary[e.first] = 1;
      mesh.vertex_boundary[e.second] = 1;
    }
  }
  mesh.check_conforming();
  return mesh;
}

BaseMesh bisect(const BaseMesh& mesh, std::span<const int> marked) {
  for (int t : marked) {
    if (t < 0 || t >= mesh.triangle_count())
      throw ValidationError("marked triangle index out of range");
  }

  const auto edges = edge_table(mesh);
  std::map<Edge, bool> edge_marked;
  for (const auto& [e, ts] : edges) edge_marked[e] = false;

  auto ref_edge = [&](int t) {
    const auto& v = mesh.triangles[t].v;
    return make_edge(v[0], v[1]);
  };

  for (int t : marked) edge_marked[ref_edge(t)] = true;

  // Closure: a triangle with any marked edge must have its refinement edge
  // marked. Marks only grow, so this settles in at most #edges sweeps.
  const int max_sweeps = 3 * static_cast<int>(edges.size()) + 8;
  int sweeps = 0;
  for (bool changed = true; changed;) {
    changed = false;
    if (++sweeps > max_sweeps)
      throw ClosureOverflow("conformity closure did not settle; incompatible refinement edges");
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const auto& v = mesh.triangles[t].v;
      bool any = false;
      for (int e = 0; e < 3; ++e) any = any || edge_marked[make_edge(v[e], v[(e + 1) % 3])];
      if (any && !edge_marked[ref_edge(t)]) {
        edge_marked[ref_edge(t)] = true;
        changed = true;
      }
    }
  }

  BaseMesh out;
  out.vertices = mesh.vertices;
  out.vertex_boundary = mesh.vertex_boundary;

  std::map<Edge, int> midpoint;
  auto get_midpoint = [&](Edge e) {
    auto it = midpoint.find(e);
    if (it != midpoint.end()) return it->second;
    const int id = out.vertex_count();
    const Point2 &a = mesh.vertices[e.first], &b = mesh.vertices[e.second];
    out.vertices.push_back({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])});
    out.vertex_boundary.push_back(edges.at(e).size() == 1 ? 1 : 0);
    midpoint[e] = id;
    return id;
  };

  // Children of (a,b,c) bisected at edge (a,b) with midpoint m:
  // (c,a,m) and (b,c,m); both keep m as the peak.
  auto emit = [&](std::array<int, 3> v, int gen, int parent, auto&& self) -> void {
    const Edge e = make_edge(v[0], v[1]);
    if (!edge_marked.count(e) || !edge_marked[e]) {
      out.triangles.push_back({v, gen, parent});
      return;
    }
    const int m = get_midpoint(e);
    self({{v[2], v[0], m}}, gen + 1, parent, self);
    self({{v[1], v[2], m}}, gen + 1, parent, self);
  };

  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    emit(tri.v, tri.generation, t, emit);
  }
  return out;
}

BaseMesh uniform_refine(const BaseMesh& mesh) {
  // Two all-marked sweeps bisect every edge: each triangle ends up with four
  // children and the parent chain still points at the original triangle.
  std::vector<int> all(mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) all[t] = t;
  const BaseMesh half = bisect(mesh, all);
  std::vector<int> all2(half.triangle_count());
  for (int t = 0; t < half.triangle_count(); ++t) all2[t] = t;
  BaseMesh full = bisect(half, all2);
  for (auto& tri : full.triangles) tri.parent = half.triangles[tri.parent].parent;
  return full;
}

double IntervalMesh::max_h() const {
  double h = 0.0;
  for (std::size_t l = 0; l + 1 < points.size(); ++l) h = std::max(h, points[l + 1] - points[l]);
  return h;
}

IntervalMesh graded_interval(double Y, int M, double gamma) {
  if (Y <= 0.0) throw ValidationError("graded_interval: Y must be positive");
  if (M < 1) throw ValidationError("graded_interval: M must be at least 1");
  if (gamma < 1.0) throw ValidationError("graded_interval: gamma must be at least 1");
  IntervalMesh im;
  im.Y = Y;
  im.gamma = gamma;
  im.points.resize(M + 1);
  for (int l = 0; l <= M; ++l)
    im.points[l] = std::pow(static_cast<double>(l) / M, gamma) * Y;
  im.points[M] = Y;
  return im;
}

ExtrudedMesh extrude(BaseMesh base, IntervalMesh interval, double alpha) {
  if (alpha <= -1.0 || alpha >= 1.0)
    throw ValidationError("extrude: alpha must lie in (-1,1)");
  ExtrudedMesh m;
  m.base = std::move(base);
  m.interval = std::move(interval);
  m.alpha = alpha;
  return m;
}

Star star(const BaseMesh& mesh, int vertex) {
  if (vertex < 0 || vertex >= mesh.vertex_count())
    throw ValidationError("star: vertex index out of range");
  Star s;
  s.center = vertex;
  s.h_min = std::numeric_limits<double>::max();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& v = mesh.triangles[t].v;
    if (v[0] == vertex || v[1] == vertex || v[2] == vertex) {
      s.triangles.push_back(t);
      s.h_min = std::min(s.h_min, mesh.diameter(t));
    }
  }
  return s;
}

bool check_grading(const ExtrudedMesh& mesh, double C) {
  if (C <= 0.0) throw ValidationError("check_grading: C must be positive");
  const double hY = mesh.interval.max_h();
  std::vector<double> h_min(mesh.base.vertex_count(), std::numeric_limits<double>::max());
  for (int t = 0; t < mesh.base.triangle_count(); ++t) {
    const double h = mesh.base.diameter(t);
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.base.triangles[t].v[k];
      h_min[v] = std::min(h_min[v], h);
    }
  }
  for (int v = 0; v < mesh.base.vertex_count(); ++v)
    if (hY > C * h_min[v]) return false;
  return true;
}

void write_mesh_text(std::ostream& os, const BaseMesh& mesh) {
  os << "vertices " << mesh.vertex_count() << " triangles " << mesh.triangle_count() << "\n";
  char buf[96];
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %d\n", mesh.vertices[v][0], mesh.vertices[v][1],
                  static_cast<int>(mesh.vertex_boundary[v]));
    os << buf;
  }
  const auto edges = edge_table(mesh);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t].v;
    int ef[3];
    for (int e = 0; e < 3; ++e)
      ef[e] = edges.at(make_edge(tri[e], tri[(e + 1) % 3])).size() == 1 ? 1 : 0;
    os << tri[0] << " " << tri[1] << " " << tri[2] << " " << ef[0] << " " << ef[1] << " " << ef[2]
       << "\n";
  }
}

BaseMesh read_mesh_text(std::istream& is) {
  std::string kw1, kw2;
  int nv = 0, nt = 0;
  if (!(is >> kw1 >> nv >> kw2 >> nt) || kw1 != "vertices" || kw2 != "triangles")
    throw IoError("mesh text: bad header");
  BaseMesh mesh;
  mesh.vertices.resize(nv);
  mesh.vertex_boundary.resize(nv);
  for (int v = 0; v < nv; ++v) {
    int flag;
    if (!(is >> mesh.vertices[v][0] >> mesh.vertices[v][1] >> flag))
      throw IoError("mesh text: truncated vertex list");
    mesh.vertex_boundary[v] = static_cast<std::uint8_t>(flag);
  }
  mesh.triangles.resize(nt);
  for (int t = 0; t < nt; ++t) {
    int e0, e1, e2;
    auto& tri = mesh.triangles[t];
    if (!(is >> tri.v[0] >> tri.v[1] >> tri.v[2] >> e0 >> e1 >> e2))
      throw IoError("mesh text: truncated triangle list");
    tri.parent = t;
  }
  return mesh;
}

void write_vtk(std::ostream& os, const BaseMesh& mesh,
               const std::vector<std::pair<std::string, std::vector<double>>>& cell_fields) {
  os << "# vtk DataFile Version 3.0\nfracopt mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.vertex_count() << " double\n";
  char buf[96];
  for (const auto& p : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", p[0], p[1]);
    os << buf;
  }
  os << "CELLS " << mesh.triangle_count() << " " << 4 * mesh.triangle_count() << "\n";
  for (const auto& t : mesh.triangles)
    os << "3 " << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
  os << "CELL_TYPES " << mesh.triangle_count() << "\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) os << "5\n";
  if (!cell_fields.empty()) {
    os << "CELL_DATA " << mesh.triangle_count() << "\n";
    for (const auto& [name, values] : cell_fields) {
      os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : values) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        os << buf;
      }
    }
  }
}

}  // namespace fracopt
