#include "fracopt/afem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace fracopt {

void AfemConfig::validate() const {
  problem.validate();
  if (max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
  if (initial_refinements < 0) throw ValidationError("initial_refinements must be nonnegative");
  if (gamma_margin <= 0.0) throw ValidationError("gamma_margin must be positive");
  if (grading_constant <= 0.0) throw ValidationError("grading_constant must be positive");
  if (m_growth <= 1.0) throw ValidationError("m_growth must exceed 1");
  if (jobs < 1) throw ValidationError("jobs must be at least 1");
  if (as_max_iterations < 1) throw ValidationError("as_max_iterations must be at least 1");
}

std::vector<int> mark_maximum(std::span<const double> indicators, double theta) {
  if (theta < 0.0 || theta > 1.0) throw ValidationError("theta must lie in [0,1]");
  double emax = 0.0;
  for (double e : indicators) {
    if (e < 0.0) throw ValidationError("indicators must be nonnegative");
    emax = std::max(emax, e);
  }
  if (emax == 0.0) throw AllZeroIndicators("every indicator is zero");
  std::vector<int> marked;
  for (std::size_t i = 0; i < indicators.size(); ++i)
    if (indicators[i] >= theta * emax) marked.push_back(static_cast<int>(i));
  return marked;
}

ExtrusionRule extrusion_rule(int nT_base, const AfemConfig& config) {
  ExtrusionRule r;
  const double lg = config.y_rule_log10 ? std::log10(static_cast<double>(nT_base))
                                        : std::log(static_cast<double>(nT_base));
  r.Y = 1.0 + lg / 3.0;
  r.gamma = 3.0 / (2.0 * config.problem.s) * (1.0 + config.gamma_margin);
  r.M = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(nT_base))));
  return r;
}

ExtrudedMesh build_extrusion(const BaseMesh& base, const AfemConfig& config) {
  ExtrusionRule r = extrusion_rule(base.triangle_count(), config);
  const double alpha = 1.0 - 2.0 * config.problem.s;
  ExtrudedMesh mesh = extrude(base, graded_interval(r.Y, r.M, r.gamma), alpha);
  if (config.enforce_grading) {
    int guard = 0;
    while (!check_grading(mesh, config.grading_constant)) {
      if (++guard > 64)
        throw NonConvergence("grading enforcement did not settle after 64 growth steps");
      r.M = std::max(r.M + 1, static_cast<int>(std::ceil(r.M * config.m_growth)));
      mesh = extrude(mesh.base, graded_interval(r.Y, r.M, r.gamma), alpha);
    }
  }
  return mesh;
}

ExtrudedMesh refine_step(const ExtrudedMesh& mesh, std::span<const int> marked,
                         const AfemConfig& config) {
  if (marked.empty()) throw ValidationError("refine_step: marked set must be nonempty");
  return build_extrusion(bisect(mesh.base, marked), config);
}

RunResult run_afem(const AfemConfig& config) {
  config.validate();
  BaseMesh base = initial_mesh(config.domain);
  for (int r = 0; r < config.initial_refinements; ++r) base = uniform_refine(base);

  RunResult result;
  std::vector<double> warm_Z;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    ExtrudedMesh mesh = build_extrusion(base, config);
    const double Y = mesh.interval.Y;
    const int M = mesh.interval.size();
    DiscreteSystem sys(std::move(mesh), config.problem.s);

    ActiveSetOptions as_opts;
    as_opts.max_iterations = config.as_max_iterations;
    const auto solved =
        active_set_solve(sys, config.problem, warm_Z.empty() ? nullptr : &warm_Z, as_opts);
    const auto est =
        estimate(sys.space, solved.quad, config.problem, config.jobs, !config.interior_stars_only);

    AfemIterate row;
    row.iter = iter;
    row.nT_base = base.triangle_count();
    row.nT_cyl = static_cast<long>(base.triangle_count()) * M;
    row.dofs = sys.space.dof_count();
    row.Y = Y;
    row.M = M;
    row.E_V = est.E_V;
    row.E_P = est.E_P;
    row.E_Z = est.E_Z;
    row.E_Lambda = est.E_Lambda;
    row.osc = est.osc;
    row.total = est.total;
    row.J = objective(sys, solved.quad, config.problem);
    row.as_iters = solved.iterations;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.trace.push_back(row);

    result.final_base = base;
    result.final_quad = solved.quad;
    result.final_labels = solved.labels;

    if (iter + 1 == config.max_iterations) break;

    std::vector<double> element_ind(est.element_sq.size());
    for (std::size_t k = 0; k < element_ind.size(); ++k)
      element_ind[k] = std::sqrt(est.element_sq[k]);
    std::vector<int> marked;
    try {
      marked = mark_maximum(element_ind, config.problem.theta);
    } catch (const AllZeroIndicators&) {
      result.all_zero_stop = true;
      break;
    }

    BaseMesh refined = bisect(base, marked);
    warm_Z.assign(refined.triangle_count(), 0.0);
    for (int t = 0; t < refined.triangle_count(); ++t)
      warm_Z[t] = solved.quad.Z[refined.triangles[t].parent];
    base = std::move(refined);
  }
  return result;
}

double fit_rate(std::span<const double> n, std::span<const double> e, int window) {
  if (n.size() != e.size()) throw DimensionMismatch("fit_rate: length mismatch");
  if (window < 3 || static_cast<std::size_t>(window) > n.size())
    throw InsufficientData("fit_rate: need a window of at least 3 rows");
  const std::size_t lo = n.size() - window;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = lo; i < n.size(); ++i) {
    if (n[i] <= 0.0 || e[i] <= 0.0)
      throw InsufficientData("fit_rate: data must be positive inside the window");
    const double x = std::log(n[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = window;
  const double denom = k * sxx - sx * sx;
  if (denom <= 0.0) throw InsufficientData("fit_rate: degenerate abscissae");
  return (k * sxy - sx * sy) / denom;
}

double fit_rate_total(const AfemTrace& trace, int window) {
  std::vector<double> n, e;
  for (const auto& row : trace) {
    n.push_back(static_cast<double>(row.nT_cyl));
    e.push_back(row.total);
  }
  return fit_rate(n, e, window);
}

}  // namespace fracopt
