#include "fracopt/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "fracopt/oracle.hpp"
#include "fracopt/quadrature.hpp"

namespace fracopt {

namespace {

using Edge = std::pair<int, int>;
Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// ---- quadratic-plus-bubble triangle element --------------------------------
// Shape order: 0..2 vertex P2, 3..5 edge P2 (edge k is opposite vertex k),
// 6 bubble.

void p2b_values(const double lam[3], double N[7]) {
  for (int i = 0; i < 3; ++i) N[i] = lam[i] * (2.0 * lam[i] - 1.0);
  for (int k = 0; k < 3; ++k) N[3 + k] = 4.0 * lam[(k + 1) % 3] * lam[(k + 2) % 3];
  N[6] = 27.0 * lam[0] * lam[1] * lam[2];
}

void p2b_gradients(const double lam[3], const double gl[3][2], double G[7][2]) {
  for (int i = 0; i < 3; ++i)
    for (int d = 0; d < 2; ++d) G[i][d] = (4.0 * lam[i] - 1.0) * gl[i][d];
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3, b = (k + 2) % 3;
    for (int d = 0; d < 2; ++d) G[3 + k][d] = 4.0 * (lam[a] * gl[b][d] + lam[b] * gl[a][d]);
  }
  for (int d = 0; d < 2; ++d)
    G[6][d] = 27.0 * (lam[1] * lam[2] * gl[0][d] + lam[0] * lam[2] * gl[1][d] +
                      lam[0] * lam[1] * gl[2][d]);
}

struct TriP2B {
  double S[7][7]{}, Mass[7][7]{};
  double Smix[3][7]{}, Mmix[3][7]{};  // P1 row, quadratic column
  double integral[7]{};
};

TriP2B tri_p2b(const BaseMesh& mesh, int t) {
  const TriP1 p1 = tri_p1(mesh, t);
  TriP2B el;
  const auto rule = gauss_rule(7);
  for (const auto& q : rule) {
    const double lam[3] = {1.0 - q.x - q.y, q.x, q.y};
    double N[7], G[7][2];
    p2b_values(lam, N);
    p2b_gradients(lam, p1.grad, G);
    const double w = 2.0 * p1.area * q.w;
    for (int p = 0; p < 7; ++p) {
      el.integral[p] += w * N[p];
      for (int r = 0; r < 7; ++r) {
        el.S[p][r] += w * (G[p][0] * G[r][0] + G[p][1] * G[r][1]);
        el.Mass[p][r] += w * N[p] * N[r];
      }
      for (int v = 0; v < 3; ++v) {
        el.Smix[v][p] += w * (p1.grad[v][0] * G[p][0] + p1.grad[v][1] * G[p][1]);
        el.Mmix[v][p] += w * lam[v] * N[p];
      }
    }
  }
  return el;
}

// ---- weighted 1D blocks per interval ----------------------------------------

struct YBlock {
  double mq[3][3], sq[3][3];    // quadratic-quadratic
  double mmix[2][3], smix[2][3];  // hat-quadratic
};

std::vector<YBlock> y_blocks(const IntervalMesh& iv, double alpha) {
  std::vector<YBlock> blocks(iv.size());
  for (int l = 0; l < iv.size(); ++l) {
    const double a = iv.points[l], h = iv.points[l + 1] - iv.points[l];
    const auto qs = quad_shapes(h);
    const auto hs = hat_shapes(h);
    auto& b = blocks[l];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        b.mq[i][j] = weighted_shape_product(qs[i], qs[j], a, h, alpha);
        b.sq[i][j] =
            weighted_shape_product(y_derivative(qs[i]), y_derivative(qs[j]), a, h, alpha);
      }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) {
        b.mmix[i][j] = weighted_shape_product(hs[i], qs[j], a, h, alpha);
        b.smix[i][j] =
            weighted_shape_product(y_derivative(hs[i]), y_derivative(qs[j]), a, h, alpha);
      }
  }
  return blocks;
}

// ---- star-local basis --------------------------------------------------------

// In-plane dofs of the local space: functions vanish on the star boundary, so
// only the center P2 dof (interior vertices), midpoints of interior edges
// through the center, and one bubble per triangle survive.
struct StarBasis {
  int nb = 0;
  std::vector<std::array<int, 7>> map;  // per star triangle: shape -> dof or -1
};

StarBasis make_star_basis(const BaseMesh& base, const Star& st,
                          const std::map<Edge, int>& edge_count) {
  StarBasis sb;
  sb.map.assign(st.triangles.size(), {-1, -1, -1, -1, -1, -1, -1});
  const int z = st.center;
  int next = 0;
  const int center_dof = base.vertex_boundary[z] ? -1 : next++;
  std::map<int, int> edge_dof;  // keyed by the opposite endpoint

  for (std::size_t k = 0; k < st.triangles.size(); ++k) {
    const auto& v = base.triangles[st.triangles[k]].v;
    int iz = -1;
    for (int i = 0; i < 3; ++i)
      if (v[i] == z) iz = i;
    auto& m = sb.map[k];
    m[iz] = center_dof;
    for (int e = 0; e < 3; ++e) {
      if (e == iz) continue;  // the edge opposite the center does not contain it
      const int a = v[(e + 1) % 3], b = v[(e + 2) % 3];
      const int other = (a == z) ? b : a;
      if (edge_count.at(make_edge(z, other)) != 2) continue;  // boundary edge
      auto it = edge_dof.find(other);
      if (it == edge_dof.end()) it = edge_dof.emplace(other, next++).first;
      m[3 + e] = it->second;
    }
  }
  for (std::size_t k = 0; k < st.triangles.size(); ++k) sb.map[k][6] = next++;
  sb.nb = next;
  return sb;
}

std::map<Edge, int> count_edges(const BaseMesh& base) {
  std::map<Edge, int> c;
  for (int t = 0; t < base.triangle_count(); ++t) {
    const auto& v = base.triangles[t].v;
    for (int e = 0; e < 3; ++e) c[make_edge(v[e], v[(e + 1) % 3])]++;
  }
  return c;
}

// ---- local assembly ----------------------------------------------------------

// Gathers the P1xP1 coefficients of a tensor field on cell (K, level l..l+1).
void gather_cell(const TensorP1Space& space, std::span<const double> U, const std::array<int, 3>& v,
                 int l, double c[3][2]) {
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 2; ++a) {
      const long d = space.dof(v[i], l + a);
      c[i][a] = d >= 0 ? U[d] : 0.0;
    }
}

struct LocalRhs {
  std::vector<double> state, adjoint;
};

// Assembles the star system; `add(row, col, value)` receives every ordered
// free pair once. Row index is ydof * nb + base dof.
template <class Sink>
LocalRhs assemble_star(const TensorP1Space& space, const ControlQuadruple& quad,
                       const ProblemData& data, const Star& st, const StarBasis& sb,
                       const std::vector<TriP2B>& tri_cache, const std::vector<YBlock>& yb,
                       std::span<const double> trace_V, Sink&& add) {
  const BaseMesh& base = space.base();
  const int M = space.levels();
  const int ny = 2 * M;  // quadratic y-dofs below the top
  const int nb = sb.nb;
  const double ds = ds_constant(data.s);
  LocalRhs rhs;
  rhs.state.assign(static_cast<std::size_t>(nb) * ny, 0.0);
  rhs.adjoint.assign(rhs.state.size(), 0.0);
  const auto rule = gauss_rule(7);

  for (std::size_t k = 0; k < st.triangles.size(); ++k) {
    const int t = st.triangles[k];
    const TriP2B& el = tri_cache[t];
    const auto& map = sb.map[k];
    const auto& v = base.triangles[t].v;

    for (int l = 0; l < M; ++l) {
      const YBlock& b = yb[l];
      double cV[3][2], cP[3][2];
      gather_cell(space, quad.V, v, l, cV);
      gather_cell(space, quad.P, v, l, cP);

      for (int p = 0; p < 7; ++p) {
        const int ip = map[p];
        if (ip < 0) continue;
        for (int i = 0; i < 3; ++i) {
          const int gi = 2 * l + i;
          if (gi >= ny) continue;
          const long row = static_cast<long>(gi) * nb + ip;
          for (int q = 0; q < 7; ++q) {
            const int iq = map[q];
            if (iq < 0) continue;
            for (int j = 0; j < 3; ++j) {
              const int gj = 2 * l + j;
              if (gj >= ny) continue;
              add(row, static_cast<long>(gj) * nb + iq,
                  (el.S[p][q] * b.mq[i][j] + el.Mass[p][q] * b.sq[i][j]) / ds);
            }
          }
          // residual part: -a_local(V, phi) and -a_local(P, phi)
          double sv = 0.0, sp = 0.0;
          for (int w = 0; w < 3; ++w)
            for (int a = 0; a < 2; ++a) {
              const double wgt = el.Smix[w][p] * b.mmix[a][i] + el.Mmix[w][p] * b.smix[a][i];
              sv += cV[w][a] * wgt;
              sp += cP[w][a] * wgt;
            }
          rhs.state[row] -= sv / ds;
          rhs.adjoint[row] -= sp / ds;
        }
      }
    }

    // trace loads act on the y = 0 dof (row index == base dof)
    for (int p = 0; p < 7; ++p) {
      const int ip = map[p];
      if (ip < 0) continue;
      rhs.state[ip] += quad.Z[t] * el.integral[p];
    }
    const Point2 &p0 = base.vertices[v[0]], &p1 = base.vertices[v[1]], &p2 = base.vertices[v[2]];
    const double scale = 2.0 * base.area(t);
    for (const auto& q : rule) {
      const double lam[3] = {1.0 - q.x - q.y, q.x, q.y};
      const double x = p0[0] + q.x * (p1[0] - p0[0]) + q.y * (p2[0] - p0[0]);
      const double y = p0[1] + q.x * (p1[1] - p0[1]) + q.y * (p2[1] - p0[1]);
      double f = lam[0] * trace_V[v[0]] + lam[1] * trace_V[v[1]] + lam[2] * trace_V[v[2]];
      if (data.u_d) f -= data.u_d(t, x, y);
      double N[7];
      p2b_values(lam, N);
      const double w = scale * q.w * f;
      for (int p = 0; p < 7; ++p)
        if (map[p] >= 0) rhs.adjoint[map[p]] += w * N[p];
    }
  }
  return rhs;
}

// Lower-band Cholesky; entry (i,j), i-bw <= j <= i.
class Banded {
public:
  Banded(long n, int bw) : n_(n), bw_(bw), a_(static_cast<std::size_t>(n) * (bw + 1), 0.0) {}

  void add(long r, long c, double v) {
    if (r < c) return;
    a_[static_cast<std::size_t>(r) * (bw_ + 1) + (c - r + bw_)] += v;
  }
  double at(long i, long j) const {
    return a_[static_cast<std::size_t>(i) * (bw_ + 1) + (j - i + bw_)];
  }
  double& at(long i, long j) { return a_[static_cast<std::size_t>(i) * (bw_ + 1) + (j - i + bw_)]; }

  void factor() {
    for (long i = 0; i < n_; ++i) {
      const long lo = std::max<long>(0, i - bw_);
      for (long j = lo; j <= i; ++j) {
        double s = at(i, j);
        for (long k = lo; k < j; ++k) s -= at(i, k) * at(j, k);
        if (i == j) {
          if (s <= 0.0)
            throw NotPositiveDefinite("star system is not positive definite (degenerate star)");
          at(i, i) = std::sqrt(s);
        } else {
          at(i, j) = s / at(j, j);
        }
      }
    }
  }

  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    for (long i = 0; i < n_; ++i) {
      double s = x[i];
      for (long k = std::max<long>(0, i - bw_); k < i; ++k) s -= at(i, k) * x[k];
      x[i] = s / at(i, i);
    }
    for (long i = n_ - 1; i >= 0; --i) {
      double s = x[i];
      const long hi = std::min<long>(n_ - 1, i + bw_);
      for (long k = i + 1; k <= hi; ++k) s -= at(k, i) * x[k];
      x[i] = s / at(i, i);
    }
    return x;
  }

private:
  long n_;
  int bw_;
  std::vector<double> a_;
};

double quadrature_l2_sq(const BaseMesh& base, int t, const TraceFn& f) {
  const TraceFn f2 = [&](int tri, double x, double y) {
    const double v = f(tri, x, y);
    return v * v;
  };
  return cell_integral(base, t, f2, 7);
}

}  // namespace

AuxiliaryFields::AuxiliaryFields(const BaseMesh& base, std::vector<double> trace_P,
                                 const ProblemData& data)
    : base_(&base),
      trace_P_(std::move(trace_P)),
      sigma_(data.sigma),
      nu_(data.nu),
      a_(data.a),
      b_(data.b) {}

double AuxiliaryFields::lambda_tilde(int tri, double x, double y) const {
  const double p = p1_eval(*base_, tri, trace_P_, x, y);
  return std::clamp(-p / nu_, -1.0, 1.0);
}

double AuxiliaryFields::r_tilde(int tri, double x, double y) const {
  const double p = p1_eval(*base_, tri, trace_P_, x, y);
  const double lam = std::clamp(-p / nu_, -1.0, 1.0);
  return std::clamp(-(p + nu_ * lam) / sigma_, a_, b_);
}

double control_indicator(const BaseMesh& base, int K, double Z_K, const AuxiliaryFields& aux) {
  const TraceFn diff = [&](int t, double x, double y) { return Z_K - aux.r_tilde(t, x, y); };
  return std::sqrt(std::max(0.0, quadrature_l2_sq(base, K, diff)));
}

double subgradient_indicator(const BaseMesh& base, int K, double Lambda_K,
                             const AuxiliaryFields& aux) {
  const TraceFn diff = [&](int t, double x, double y) {
    return Lambda_K - aux.lambda_tilde(t, x, y);
  };
  return std::sqrt(std::max(0.0, quadrature_l2_sq(base, K, diff)));
}

double oscillation(const BaseMesh& base, const Star& st, const TraceFn& f, double s) {
  double sum = 0.0;
  for (int t : st.triangles) {
    const double mean = cell_integral(base, t, f, 7) / base.area(t);
    const TraceFn centered = [&](int tri, double x, double y) { return f(tri, x, y) - mean; };
    sum += quadrature_l2_sq(base, t, centered);
  }
  return std::pow(st.h_min, s) * std::sqrt(std::max(0.0, sum));
}

double efficiency_constant(double s, double sigma, double nu) {
  const double ds = ds_constant(s);
  const double rt = std::sqrt(ds);
  return std::max({2.0, rt + 1.0, (1.0 / nu + 2.0 / sigma + rt) / rt, 1.0});
}

LocalSystem build_local_system(const TensorP1Space& space, const ControlQuadruple& quad,
                               const ProblemData& data, const Star& st) {
  const auto edge_count = count_edges(space.base());
  const StarBasis sb = make_star_basis(space.base(), st, edge_count);
  std::vector<TriP2B> cache(space.base().triangle_count());
  for (int t : st.triangles) cache[t] = tri_p2b(space.base(), t);
  const auto yb = y_blocks(space.mesh().interval, space.mesh().alpha);
  const auto trV = space.trace(quad.V);

  LocalSystem sys;
  sys.base_dofs = sb.nb;
  sys.y_dofs = 2 * space.levels();
  sys.star_triangles = st.triangles;
  sys.tri_dof_map = sb.map;
  const long n = static_cast<long>(sb.nb) * sys.y_dofs;
  sys.A = DenseSpd(static_cast<int>(n));
  auto rhs = assemble_star(space, quad, data, st, sb, cache, yb, trV,
                           [&](long r, long c, double v) { sys.A.at(static_cast<int>(r),
                                                                    static_cast<int>(c)) += v; });
  sys.rhs_state = std::move(rhs.state);
  sys.rhs_adjoint = std::move(rhs.adjoint);
  return sys;
}

namespace {

struct StarWork {
  double E_V_sq = 0.0, E_P_sq = 0.0;
};

StarWork solve_star(const TensorP1Space& space, const ControlQuadruple& quad,
                    const ProblemData& data, const Star& st, const StarBasis& sb,
                    const std::vector<TriP2B>& tri_cache, const std::vector<YBlock>& yb,
                    std::span<const double> trace_V) {
  const long n = static_cast<long>(sb.nb) * 2 * space.levels();
  const int bw = 3 * sb.nb - 1;
  Banded A(n, bw);
  auto rhs = assemble_star(space, quad, data, st, sb, tri_cache, yb, trace_V,
                           [&](long r, long c, double v) { A.add(r, c, v); });
  A.factor();
  const auto eta = A.solve(rhs.state);
  const auto theta = A.solve(rhs.adjoint);
  const double ds = ds_constant(data.s);
  StarWork w;
  w.E_V_sq = std::max(0.0, ds * dot(eta, rhs.state));
  w.E_P_sq = std::max(0.0, ds * dot(theta, rhs.adjoint));
  return w;
}

}  // namespace

StarReport star_report(const TensorP1Space& space, const ControlQuadruple& quad,
                       const ProblemData& data, int vertex) {
  const BaseMesh& base = space.base();
  const Star st = star(base, vertex);
  const auto edge_count = count_edges(base);
  const StarBasis sb = make_star_basis(base, st, edge_count);
  std::vector<TriP2B> cache(base.triangle_count());
  for (int t : st.triangles) cache[t] = tri_p2b(base, t);
  const auto yb = y_blocks(space.mesh().interval, space.mesh().alpha);
  const auto trV = space.trace(quad.V);
  const auto w = solve_star(space, quad, data, st, sb, cache, yb, trV);

  const AuxiliaryFields aux(base, space.trace(quad.P), data);
  StarReport rep;
  rep.vertex = vertex;
  rep.star_size = static_cast<int>(st.triangles.size());
  rep.E_V = std::sqrt(w.E_V_sq);
  rep.E_P = std::sqrt(w.E_P_sq);
  double ez_sq = 0.0, el_sq = 0.0;
  for (int t : st.triangles) {
    const double ez = control_indicator(base, t, quad.Z[t], aux);
    const double el = subgradient_indicator(base, t, quad.Lambda[t], aux);
    ez_sq += ez * ez;
    el_sq += el * el;
  }
  rep.E_Z = std::sqrt(ez_sq);
  rep.E_Lambda = std::sqrt(el_sq);
  const auto trV2 = space.trace(quad.V);
  const TraceFn f = [&](int t, double x, double y) {
    const double v = p1_eval(base, t, trV2, x, y);
    return data.u_d ? v - data.u_d(t, x, y) : v;
  };
  rep.osc = oscillation(base, st, f, data.s);
  rep.total = std::sqrt(w.E_V_sq + w.E_P_sq + ez_sq + el_sq + rep.osc * rep.osc);
  return rep;
}

EstimateResult estimate(const TensorP1Space& space, const ControlQuadruple& quad,
                        const ProblemData& data, int jobs, bool include_boundary_stars) {
  const BaseMesh& base = space.base();
  const int nv = base.vertex_count();
  const int nt = base.triangle_count();

  // Shared caches: per-triangle elements, per-interval weighted blocks,
  // per-cell control/subgradient/oscillation contributions.
  std::vector<TriP2B> tri_cache(nt);
  for (int t = 0; t < nt; ++t) tri_cache[t] = tri_p2b(base, t);
  const auto yb = y_blocks(space.mesh().interval, space.mesh().alpha);
  const auto edge_count = count_edges(base);
  const auto trV = space.trace(quad.V);
  const AuxiliaryFields aux(base, space.trace(quad.P), data);

  std::vector<double> ez_cell(nt), el_cell(nt), osc_cell_sq(nt);
  const TraceFn fosc = [&](int t, double x, double y) {
    const double v = p1_eval(base, t, trV, x, y);
    return data.u_d ? v - data.u_d(t, x, y) : v;
  };
  for (int t = 0; t < nt; ++t) {
    ez_cell[t] = control_indicator(base, t, quad.Z[t], aux);
    el_cell[t] = subgradient_indicator(base, t, quad.Lambda[t], aux);
    const double mean = cell_integral(base, t, fosc, 7) / base.area(t);
    const TraceFn centered = [&](int tri, double x, double y) { return fosc(tri, x, y) - mean; };
    osc_cell_sq[t] = std::max(0.0, quadrature_l2_sq(base, t, centered));
  }

  std::vector<Star> stars(nv);
  std::vector<int> active;
  {
    std::vector<std::vector<int>> incident(nv);
    for (int t = 0; t < nt; ++t)
      for (int k = 0; k < 3; ++k) incident[base.triangles[t].v[k]].push_back(t);
    for (int v = 0; v < nv; ++v) {
      if (!include_boundary_stars && base.vertex_boundary[v]) continue;
      Star st;
      st.center = v;
      st.triangles = incident[v];
      st.h_min = std::numeric_limits<double>::max();
      for (int t : st.triangles) st.h_min = std::min(st.h_min, base.diameter(t));
      stars[v] = std::move(st);
      active.push_back(v);
    }
  }

  EstimateResult res;
  res.stars.resize(active.size());
  auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const int v = active[i];
      const Star& st = stars[v];
      const StarBasis sb = make_star_basis(base, st, edge_count);
      const StarWork w = solve_star(space, quad, data, st, sb, tri_cache, yb, trV);
      StarReport rep;
      rep.vertex = v;
      rep.star_size = static_cast<int>(st.triangles.size());
      rep.E_V = std::sqrt(w.E_V_sq);
      rep.E_P = std::sqrt(w.E_P_sq);
      double ez_sq = 0.0, el_sq = 0.0, osq = 0.0;
      for (int t : st.triangles) {
        ez_sq += ez_cell[t] * ez_cell[t];
        el_sq += el_cell[t] * el_cell[t];
        osq += osc_cell_sq[t];
      }
      rep.E_Z = std::sqrt(ez_sq);
      rep.E_Lambda = std::sqrt(el_sq);
      rep.osc = std::pow(st.h_min, data.s) * std::sqrt(osq);
      rep.total = std::sqrt(w.E_V_sq + w.E_P_sq + ez_sq + el_sq + rep.osc * rep.osc);
      res.stars[i] = rep;
    }
  };

  const int workers = std::max(1, jobs);
  if (workers == 1 || active.size() < 2) {
    run_range(0, active.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (active.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(active.size(), lo + chunk);
      if (lo < hi) pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  res.element_sq.assign(nt, 0.0);
  double ev_sq = 0.0, ep_sq = 0.0, osc_sq = 0.0, total_sq = 0.0;
  for (const auto& rep : res.stars) {
    ev_sq += rep.E_V * rep.E_V;
    ep_sq += rep.E_P * rep.E_P;
    osc_sq += rep.osc * rep.osc;
    total_sq += rep.total * rep.total;
    const double share = rep.total * rep.total / rep.star_size;
    for (int t : stars[rep.vertex].triangles) res.element_sq[t] += share;
  }
  double ez_sq = 0.0, el_sq = 0.0;
  for (int t = 0; t < nt; ++t) {
    ez_sq += ez_cell[t] * ez_cell[t];
    el_sq += el_cell[t] * el_cell[t];
  }
  res.E_V = std::sqrt(ev_sq);
  res.E_P = std::sqrt(ep_sq);
  res.E_Z = std::sqrt(ez_sq);
  res.E_Lambda = std::sqrt(el_sq);
  res.osc = std::sqrt(osc_sq);
  res.total = std::sqrt(total_sq);
  return res;
}

}  // namespace fracopt
