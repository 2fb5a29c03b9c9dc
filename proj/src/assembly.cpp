#include "fracopt/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "fracopt/oracle.hpp"
#include "fracopt/quadrature.hpp"

namespace fracopt {

double weighted_moment(double ya, double yb, double alpha, int k) {
  if (alpha <= -1.0 || alpha >= 1.0) throw ValidationError("weighted_moment: alpha not in (-1,1)");
  if (k < 0) throw ValidationError("weighted_moment: negative degree");
  if (ya < 0.0 || yb <= ya) throw ValidationError("weighted_moment: need 0 <= ya < yb");
  const double p = alpha + k + 1.0;
  const double lo = ya == 0.0 ? 0.0 : std::pow(ya, p);
  return (std::pow(yb, p) - lo) / p;
}

double shifted_weighted_moment(double a, double h, double alpha, int k) {
  if (h <= 0.0) throw ValidationError("shifted_weighted_moment: need h > 0");
  if (a == 0.0) return std::pow(h, alpha + k + 1.0) / (alpha + k + 1.0);
  if (h >= 0.5 * a) {
    // (y-a)^k expanded in y-monomials; amplification is bounded by (1+a/h)^k.
    double sum = 0.0;
    double binom = 1.0;
    for (int i = 0; i <= k; ++i) {
      const double sign = ((k - i) % 2 == 0) ? 1.0 : -1.0;
      sum += binom * sign * std::pow(a, k - i) * weighted_moment(a, a + h, alpha, i);
      binom = binom * (k - i) / (i + 1.0);
    }
    return sum;
  }
  // y^alpha = a^alpha (1 + t/a)^alpha expanded as a binomial series; the ratio
  // h/a < 1/2 makes it geometrically convergent.
  const double r = h / a;
  double coef = 1.0;
  double rpow = 1.0;
  double sum = 1.0 / (k + 1.0);
  for (int j = 1; j < 200; ++j) {
    coef *= (alpha - j + 1.0) / j;
    rpow *= r;
    const double term = coef * rpow / (k + j + 1.0);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::pow(a, alpha) * std::pow(h, k + 1.0) * sum;
}

WeightedMomentTable WeightedMomentTable::build(const IntervalMesh& interval, double alpha) {
  WeightedMomentTable t;
  t.alpha = alpha;
  t.mu.resize(interval.size());
  for (int l = 0; l < interval.size(); ++l)
    for (int k = 0; k <= 6; ++k)
      t.mu[l][k] = weighted_moment(interval.points[l], interval.points[l + 1], alpha, k);
  return t;
}

YShape y_derivative(const YShape& f) { return YShape{{f.c[1], 2.0 * f.c[2], 0.0}}; }

std::array<YShape, 2> hat_shapes(double h) {
  return {YShape{{1.0, -1.0 / h, 0.0}}, YShape{{0.0, 1.0 / h, 0.0}}};
}

std::array<YShape, 3> quad_shapes(double h) {
  const double ih = 1.0 / h, ih2 = ih * ih;
  return {YShape{{1.0, -3.0 * ih, 2.0 * ih2}},  // node t = 0
          YShape{{0.0, 4.0 * ih, -4.0 * ih2}},  // node t = h/2
          YShape{{0.0, -ih, 2.0 * ih2}}};       // node t = h
}

double weighted_shape_product(const YShape& f, const YShape& g, double a, double h, double alpha) {
  double conv[5] = {0, 0, 0, 0, 0};
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) conv[p + q] += f.c[p] * g.c[q];
  double sum = 0.0;
  for (int k = 0; k <= 4; ++k)
    if (conv[k] != 0.0) sum += conv[k] * shifted_weighted_moment(a, h, alpha, k);
  return sum;
}

TriP1 tri_p1(const BaseMesh& mesh, int t) {
  const auto& v = mesh.triangles[t].v;
  const Point2 &p0 = mesh.vertices[v[0]], &p1 = mesh.vertices[v[1]], &p2 = mesh.vertices[v[2]];
  TriP1 el;
  const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
  el.area = 0.5 * det;
  const double b[3] = {p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]};
  const double c[3] = {p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]};
  for (int i = 0; i < 3; ++i) {
    el.grad[i][0] = b[i] / det;
    el.grad[i][1] = c[i] / det;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      el.stiff[i][j] = el.area * (el.grad[i][0] * el.grad[j][0] + el.grad[i][1] * el.grad[j][1]);
      el.mass[i][j] = el.area / 12.0 * (i == j ? 2.0 : 1.0);
    }
  return el;
}

double p1_eval(const BaseMesh& mesh, int t, std::span<const double> vertex_values, double x,
               double y) {
  const auto& v = mesh.triangles[t].v;
  const Point2 &p0 = mesh.vertices[v[0]], &p1 = mesh.vertices[v[1]], &p2 = mesh.vertices[v[2]];
  const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
  const double l1 = ((x - p0[0]) * (p2[1] - p0[1]) - (y - p0[1]) * (p2[0] - p0[0])) / det;
  const double l2 = ((p1[0] - p0[0]) * (y - p0[1]) - (p1[1] - p0[1]) * (x - p0[0])) / det;
  const double l0 = 1.0 - l1 - l2;
  return l0 * vertex_values[v[0]] + l1 * vertex_values[v[1]] + l2 * vertex_values[v[2]];
}

double cell_integral(const BaseMesh& mesh, int t, const TraceFn& f, int degree) {
  const auto rule = gauss_rule(degree);
  const auto& v = mesh.triangles[t].v;
  const Point2 &p0 = mesh.vertices[v[0]], &p1 = mesh.vertices[v[1]], &p2 = mesh.vertices[v[2]];
  double sum = 0.0;
  for (const auto& q : rule) {
    const double x = p0[0] + q.x * (p1[0] - p0[0]) + q.y * (p2[0] - p0[0]);
    const double y = p0[1] + q.x * (p1[1] - p0[1]) + q.y * (p2[1] - p0[1]);
    sum += q.w * f(t, x, y);
  }
  return 2.0 * mesh.area(t) * sum;
}

double integrate(const BaseMesh& mesh, const TraceFn& f, int degree) {
  double sum = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) sum += cell_integral(mesh, t, f, degree);
  return sum;
}

TensorP1Space::TensorP1Space(ExtrudedMesh mesh) : mesh_(std::move(mesh)) {
  base_index_.assign(mesh_.base.vertex_count(), -1);
  for (int v = 0; v < mesh_.base.vertex_count(); ++v)
    if (!mesh_.base.vertex_boundary[v]) base_index_[v] = n_free_base_++;
}

std::vector<double> TensorP1Space::trace(std::span<const double> V) const {
  if (static_cast<long>(V.size()) != dof_count())
    throw DimensionMismatch("trace: coefficient length mismatch");
  std::vector<double> tr(mesh_.base.vertex_count(), 0.0);
  for (int v = 0; v < mesh_.base.vertex_count(); ++v) {
    const long d = dof(v, 0);
    if (d >= 0) tr[v] = V[d];
  }
  return tr;
}

SparseSpd assemble_stiffness(const TensorP1Space& space, double s) {
  if (s <= 0.0 || s >= 1.0) throw InvalidOrder("assemble_stiffness: s must lie in (0,1)");
  const double alpha = 1.0 - 2.0 * s;
  if (std::abs(alpha - space.mesh().alpha) > 1e-12)
    throw ValidationError("assemble_stiffness: mesh weight disagrees with 1-2s");
  const double ds = ds_constant(s);
  const BaseMesh& base = space.base();
  const IntervalMesh& iv = space.mesh().interval;
  const int M = iv.size();
  const long n = space.dof_count();

  // Sparsity pattern: base adjacency tensor the three-level y stencil.
  std::vector<std::vector<int>> nbr(base.vertex_count());
  for (int t = 0; t < base.triangle_count(); ++t) {
    const auto& v = base.triangles[t].v;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) nbr[v[i]].push_back(v[j]);
  }
  for (auto& list : nbr) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  std::vector<int> row_ptr(n + 1, 0);
  for (int v = 0; v < base.vertex_count(); ++v) {
    if (space.base_index(v) < 0) continue;
    int deg = 0;
    for (int w : nbr[v]) deg += space.base_index(w) >= 0 ? 1 : 0;
    for (int l = 0; l < M; ++l) {
      const int span_y = (l > 0 ? 1 : 0) + 1 + (l < M - 1 ? 1 : 0);
      row_ptr[space.dof(v, l) + 1] = deg * span_y;
    }
  }
  for (long i = 0; i < n; ++i) row_ptr[i + 1] += row_ptr[i];
  std::vector<int> col(row_ptr[n]);
  {
    std::vector<int> fill(n, 0);
    for (int v = 0; v < base.vertex_count(); ++v) {
      if (space.base_index(v) < 0) continue;
      for (int l = 0; l < M; ++l) {
        const long r = space.dof(v, l);
        for (int dl = -1; dl <= 1; ++dl) {
          const int lp = l + dl;
          if (lp < 0 || lp >= M) continue;
          for (int w : nbr[v]) {
            const long cdof = space.dof(w, lp);
            if (cdof >= 0) col[row_ptr[r] + fill[r]++] = static_cast<int>(cdof);
          }
        }
      }
    }
    for (long r = 0; r < n; ++r) std::sort(col.begin() + row_ptr[r], col.begin() + row_ptr[r + 1]);
  }
  std::vector<double> val(col.size(), 0.0);
  auto add = [&](long r, long c, double v) {
    auto b = col.begin() + row_ptr[r], e = col.begin() + row_ptr[r + 1];
    auto it = std::lower_bound(b, e, static_cast<int>(c));
    val[it - col.begin()] += v;
  };

  // Per-interval weighted hat matrices.
  std::vector<std::array<double, 4>> mw(M), sw(M);
  for (int l = 0; l < M; ++l) {
    const double a = iv.points[l], h = iv.points[l + 1] - iv.points[l];
    const auto hats = hat_shapes(h);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        mw[l][2 * i + j] = weighted_shape_product(hats[i], hats[j], a, h, alpha);
        sw[l][2 * i + j] =
            weighted_shape_product(y_derivative(hats[i]), y_derivative(hats[j]), a, h, alpha);
      }
  }

  for (int t = 0; t < base.triangle_count(); ++t) {
    const TriP1 el = tri_p1(base, t);
    const auto& v = base.triangles[t].v;
    for (int l = 0; l < M; ++l) {
      for (int i = 0; i < 3; ++i) {
        for (int a = 0; a < 2; ++a) {
          const long r = space.dof(v[i], l + a);
          if (r < 0) continue;
          for (int j = 0; j < 3; ++j)
            for (int b = 0; b < 2; ++b) {
              const long c = space.dof(v[j], l + b);
              if (c < 0) continue;
              add(r, c,
                  (el.stiff[i][j] * mw[l][2 * a + b] + el.mass[i][j] * sw[l][2 * a + b]) / ds);
            }
        }
      }
    }
  }
  return SparseSpd::from_csr(static_cast<int>(n), std::move(row_ptr), std::move(col),
                             std::move(val));
}

std::vector<double> assemble_trace_load_p0(const TensorP1Space& space,
                                           std::span<const double> cell_values) {
  if (static_cast<int>(cell_values.size()) != space.base().triangle_count())
    throw DimensionMismatch("trace load: one value per triangle required");
  std::vector<double> load(space.dof_count(), 0.0);
  const BaseMesh& base = space.base();
  for (int t = 0; t < base.triangle_count(); ++t) {
    const double w = cell_values[t] * base.area(t) / 3.0;
    for (int i = 0; i < 3; ++i) {
      const long d = space.dof(base.triangles[t].v[i], 0);
      if (d >= 0) load[d] += w;
    }
  }
  return load;
}

std::vector<double> assemble_trace_load_p1(const TensorP1Space& space,
                                           std::span<const double> vertex_values) {
  if (static_cast<int>(vertex_values.size()) != space.base().vertex_count())
    throw DimensionMismatch("trace load: one value per vertex required");
  std::vector<double> load(space.dof_count(), 0.0);
  const BaseMesh& base = space.base();
  for (int t = 0; t < base.triangle_count(); ++t) {
    const TriP1 el = tri_p1(base, t);
    const auto& v = base.triangles[t].v;
    for (int i = 0; i < 3; ++i) {
      const long d = space.dof(v[i], 0);
      if (d < 0) continue;
      for (int j = 0; j < 3; ++j) load[d] += el.mass[i][j] * vertex_values[v[j]];
    }
  }
  return load;
}

std::vector<double> assemble_trace_load_fn(const TensorP1Space& space, const TraceFn& f,
                                           int degree) {
  std::vector<double> load(space.dof_count(), 0.0);
  const BaseMesh& base = space.base();
  const auto rule = gauss_rule(degree);
  for (int t = 0; t < base.triangle_count(); ++t) {
    const auto& v = base.triangles[t].v;
    const Point2 &p0 = base.vertices[v[0]], &p1 = base.vertices[v[1]], &p2 = base.vertices[v[2]];
    const double scale = 2.0 * base.area(t);
    for (const auto& q : rule) {
      const double x = p0[0] + q.x * (p1[0] - p0[0]) + q.y * (p2[0] - p0[0]);
      const double y = p0[1] + q.x * (p1[1] - p0[1]) + q.y * (p2[1] - p0[1]);
      const double fv = f(t, x, y);
      const double lam[3] = {1.0 - q.x - q.y, q.x, q.y};
      for (int i = 0; i < 3; ++i) {
        const long d = space.dof(v[i], 0);
        if (d >= 0) load[d] += scale * q.w * fv * lam[i];
      }
    }
  }
  return load;
}

}  // namespace fracopt
