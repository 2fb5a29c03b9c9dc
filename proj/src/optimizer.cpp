#include "fracopt/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "fracopt/oracle.hpp"

namespace fracopt {

void ProblemData::validate() const {
  if (s <= 0.0 || s >= 1.0) throw ValidationError("s must lie in (0,1)");
  if (sigma <= 0.0) throw ValidationError("sigma must be positive");
  if (nu <= 0.0) throw ValidationError("nu must be positive");
  if (!(a < 0.0 && 0.0 < b)) throw ValidationError("control bounds must satisfy a < 0 < b");
  if (theta < 0.0 || theta > 1.0) throw ValidationError("theta must lie in [0,1]");
}

LinePreconditioner::LinePreconditioner(const SparseSpd& A, int levels) : levels_(levels) {
  const int n = A.dimension();
  if (levels < 1 || n % levels != 0)
    throw DimensionMismatch("line preconditioner: dimension is not a multiple of the level count");
  inv_diag_.assign(n, 0.0);
  lower_.assign(n, 0.0);
  for (int line = 0; line < n / levels; ++line) {
    const int base = line * levels;
    double d_prev = 0.0;
    for (int l = 0; l < levels; ++l) {
      const int row = base + l;
      double a = A.entry(row, row);
      if (l > 0) {
        const double e = A.entry(row, row - 1);
        const double w = e / d_prev;
        a -= w * e;
        lower_[row] = w;
      }
      if (a <= 0.0) throw NotPositiveDefinite("line preconditioner: nonpositive pivot");
      inv_diag_[row] = 1.0 / a;
      d_prev = a;
    }
  }
}

void LinePreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const int n = static_cast<int>(inv_diag_.size());
  for (int line = 0; line < n / levels_; ++line) {
    const int base = line * levels_;
    z[base] = r[base];
    for (int l = 1; l < levels_; ++l)
      z[base + l] = r[base + l] - lower_[base + l] * z[base + l - 1];
    for (int l = 0; l < levels_; ++l) z[base + l] *= inv_diag_[base + l];
    for (int l = levels_ - 2; l >= 0; --l)
      z[base + l] -= lower_[base + l + 1] * z[base + l + 1];
  }
}

DiscreteSystem::DiscreteSystem(ExtrudedMesh mesh, double s_)
    : space(std::move(mesh)),
      A(assemble_stiffness(space, s_)),
      precond(A, space.levels()),
      s(s_) {}

std::vector<double> solve_state(const DiscreteSystem& sys, std::span<const double> Z,
                                const std::vector<double>* x0) {
  const auto load = assemble_trace_load_p0(sys.space, Z);
  CgOptions opts;
  opts.x0 = x0;
  opts.precond = &sys.precond;
  return cg_solve(sys.A, load, opts).x;
}

std::vector<double> solve_adjoint(const DiscreteSystem& sys, std::span<const double> V,
                                  const ProblemData& data, const std::vector<double>* x0) {
  auto load = assemble_trace_load_p1(sys.space, sys.space.trace(V));
  if (data.u_d) {
    const auto dload = assemble_trace_load_fn(sys.space, data.u_d, 4);
    for (std::size_t i = 0; i < load.size(); ++i) load[i] -= dload[i];
  }
  CgOptions opts;
  opts.x0 = x0;
  opts.precond = &sys.precond;
  return cg_solve(sys.A, load, opts).x;
}

double cell_average_trace(const TensorP1Space& space, std::span<const double> trace_values,
                          int K) {
  const auto& v = space.base().triangles[K].v;
  return (trace_values[v[0]] + trace_values[v[1]] + trace_values[v[2]]) / 3.0;
}

double project_subgradient(double q, double nu) {
  if (nu <= 0.0) throw ValidationError("project_subgradient: nu must be positive");
  return std::clamp(-q / nu, -1.0, 1.0);
}

double project_control(double q, double lambda, const ProblemData& data) {
  if (lambda < -1.0 || lambda > 1.0)
    throw ValidationError("project_control: lambda must lie in [-1,1]");
  // + 0.0 turns the negative zero of an exactly cancelled numerator into +0
  return std::clamp(-(q + data.nu * lambda) / data.sigma, data.a, data.b) + 0.0;
}

CellLabel classify_cell(double q, const ProblemData& data) {
  if (std::abs(q) <= data.nu) return CellLabel::Zero;
  const double lambda = project_subgradient(q, data.nu);
  const double v = -(q + data.nu * lambda) / data.sigma;
  if (v <= data.a) return CellLabel::Lower;
  if (v >= data.b) return CellLabel::Upper;
  return v < 0.0 ? CellLabel::FreeNeg : CellLabel::FreePos;
}

namespace {

struct Sweep {
  std::vector<double> q;       // cell averages of tr P
  std::vector<double> Lambda;  // projected subgradient
  std::vector<double> Zstar;   // projected control
  std::vector<CellLabel> labels;
};

// One state/adjoint solve followed by the cellwise projections.
Sweep projection_sweep(const DiscreteSystem& sys, const ProblemData& data,
                       std::span<const double> Z, std::vector<double>& V, std::vector<double>& P) {
  V = solve_state(sys, Z, V.empty() ? nullptr : &V);
  P = solve_adjoint(sys, V, data, P.empty() ? nullptr : &P);
  const auto trP = sys.space.trace(P);
  const int nT = sys.space.base().triangle_count();
  Sweep sw;
  sw.q.resize(nT);
  sw.Lambda.resize(nT);
  sw.Zstar.resize(nT);
  sw.labels.resize(nT);
  for (int t = 0; t < nT; ++t) {
    sw.q[t] = cell_average_trace(sys.space, trP, t);
    sw.Lambda[t] = project_subgradient(sw.q[t], data.nu);
    sw.Zstar[t] = project_control(sw.q[t], sw.Lambda[t], data);
    sw.labels[t] = classify_cell(sw.q[t], data);
  }
  return sw;
}

double control_distance(const BaseMesh& base, std::span<const double> z1,
                        std::span<const double> z2) {
  double s = 0.0;
  for (int t = 0; t < base.triangle_count(); ++t) {
    const double d = z1[t] - z2[t];
    s += base.area(t) * d * d;
  }
  return std::sqrt(s);
}

}  // namespace

ActiveSetResult active_set_solve(const DiscreteSystem& sys, const ProblemData& data,
                                 const std::vector<double>* warm_start,
                                 const ActiveSetOptions& opts) {
  data.validate();
  const BaseMesh& base = sys.space.base();
  const int nT = base.triangle_count();
  std::vector<double> Z(nT, 0.0);
  if (warm_start) {
    if (static_cast<int>(warm_start->size()) != nT)
      throw DimensionMismatch("active_set_solve: warm start size mismatch");
    Z = *warm_start;
    for (double& z : Z) z = std::clamp(z, data.a, data.b);
  }

  ActiveSetResult res;
  std::vector<double> V, P;
  std::vector<CellLabel> prev_labels;
  bool have_prev = false;
  int iters = 0;
  bool converged = false;
  Sweep sw;

  // Plain projection sweeps with measured under-relaxation as fallback: when
  // the control change stops contracting, the dominant multiplier of the
  // relaxed map is estimated from consecutive increments and omega is re-tuned
  // to 2/(2 + rho), which balances the oscillating and the slow modes.
  double omega = 1.0;
  std::vector<double> dz_regime;  // increments observed under the current omega
  while (iters < opts.max_iterations && !converged) {
    ++iters;
    sw = projection_sweep(sys, data, Z, V, P);
    {
      // J of the current control paired with its own state
      ControlQuadruple q{V, P, Z, sw.Lambda};
      res.objective_history.push_back(objective(sys, q, data));
    }
    std::vector<double> Znew(nT);
    for (int t = 0; t < nT; ++t) Znew[t] = omega * sw.Zstar[t] + (1.0 - omega) * Z[t];
    const double dz = control_distance(base, Znew, Z);
    const bool labels_stable = have_prev && sw.labels == prev_labels;
    Z = std::move(Znew);
    prev_labels = sw.labels;
    have_prev = true;
    if (labels_stable && dz <= opts.z_tol) {
      converged = true;
      break;
    }
    dz_regime.push_back(dz);
    const std::size_t k = dz_regime.size();
    if (k >= 5 && dz_regime[k - 1] > 0.0 &&
        dz_regime[k - 1] >= 0.9 * dz_regime[k - 4] && omega > 0.021) {
      // not contracting: infer the undamped multiplier and damp harder
      double m = 0.0;
      for (std::size_t j = k - 3; j < k; ++j)
        m = std::max(m, dz_regime[j] / std::max(dz_regime[j - 1], 1e-300));
      m = std::clamp(m, 1.0, 1e6);
      const double rho = (1.0 + m) / omega - 1.0;
      omega = std::clamp(2.0 / (2.0 + rho), 0.02, 0.8 * omega);
      if (res.first_damped_sweep < 0)
        res.first_damped_sweep = static_cast<int>(res.objective_history.size());
      dz_regime.clear();
    }
  }
  res.omega = omega;
  if (!converged)
    throw MaxIterations("active_set_solve: no stable active set after " + std::to_string(iters) +
                        " iterations (final relaxation " + std::to_string(omega) + ")");

  // Snap to the exact projections, then make the returned quadruple
  // self-consistent: V and P correspond to the snapped control.
  res.quad.Z = sw.Zstar;
  res.quad.Lambda = sw.Lambda;
  res.labels = sw.labels;
  res.quad.V = solve_state(sys, res.quad.Z, &V);
  res.quad.P = solve_adjoint(sys, res.quad.V, data, &P);
  ++iters;

  // The snapped control must reproduce its own labeling.
  const auto trP = sys.space.trace(res.quad.P);
  for (int t = 0; t < nT; ++t) {
    const double q = cell_average_trace(sys.space, trP, t);
    if (classify_cell(q, data) != res.labels[t])
      throw MaxIterations("active_set_solve: labeling not stable under the final solve");
  }
  res.iterations = iters;
  return res;
}

double objective(const DiscreteSystem& sys, const ControlQuadruple& quad,
                 const ProblemData& data) {
  const auto trV = sys.space.trace(quad.V);
  const BaseMesh& base = sys.space.base();
  const TraceFn diff = [&](int t, double x, double y) {
    const double v = p1_eval(base, t, trV, x, y);
    const double d = data.u_d ? data.u_d(t, x, y) : 0.0;
    const double e = v - d;
    return e * e;
  };
  double J = 0.5 * integrate(base, diff, 4);
  for (int t = 0; t < base.triangle_count(); ++t) {
    const double area = base.area(t);
    J += 0.5 * data.sigma * area * quad.Z[t] * quad.Z[t] + data.nu * area * std::abs(quad.Z[t]);
  }
  return J;
}

}  // namespace fracopt
