#ifndef FRACOPT_AFEM_HPP
#define FRACOPT_AFEM_HPP

#include <string>

#include "fracopt/estimator.hpp"

namespace fracopt {

struct AfemConfig {
  ProblemData problem;
  DomainSpec domain;
  std::string ud_expression = "0";

  int max_iterations = 10;
  int initial_refinements = 2;

  // Cylinder rules: Y = 1 + (1/3) log(#T), gamma = 3/(2s) * (1 + gamma_margin),
  // M = ceil(sqrt(#T)), grown by m_growth until the grading condition holds
  // (when enforcement is on).
  bool y_rule_log10 = false;  // natural log by default
  double gamma_margin = 0.1;
  bool enforce_grading = false;
  double grading_constant = 10.0;
  double m_growth = 1.1;

  bool interior_stars_only = false;
  int jobs = 1;
  bool vtk = false;
  bool timing = false;
  int as_max_iterations = 100;

  void validate() const;
};

struct AfemIterate {
  int iter = 0;
  int nT_base = 0;
  long nT_cyl = 0;
  long dofs = 0;
  double Y = 0.0;
  int M = 0;
  double E_V = 0.0, E_P = 0.0, E_Z = 0.0, E_Lambda = 0.0, osc = 0.0, total = 0.0;
  double J = 0.0;
  int as_iters = 0;
  double seconds = 0.0;
};

using AfemTrace = std::vector<AfemIterate>;

// Maximum strategy: {K : E_K >= theta * max E_K}. Throws AllZeroIndicators
// when every indicator vanishes.
std::vector<int> mark_maximum(std::span<const double> indicators, double theta);

// Truncation, grading exponent and interval count for a base mesh size.
struct ExtrusionRule {
  double Y = 0.0;
  double gamma = 0.0;
  int M = 0;
};
ExtrusionRule extrusion_rule(int nT_base, const AfemConfig& config);

// Builds the cylinder mesh for a base triangulation, growing M until the
// grading condition holds when enforcement is requested.
ExtrudedMesh build_extrusion(const BaseMesh& base, const AfemConfig& config);

// One adaptive refinement: bisect the marked base triangles and re-extrude.
ExtrudedMesh refine_step(const ExtrudedMesh& mesh, std::span<const int> marked,
                         const AfemConfig& config);

struct RunResult {
  AfemTrace trace;
  BaseMesh final_base;
  ControlQuadruple final_quad;
  std::vector<CellLabel> final_labels;
  bool all_zero_stop = false;
};

RunResult run_afem(const AfemConfig& config);

// Least-squares slope of log(e) against log(n) over the trailing `window`
// entries. Throws InsufficientData for windows shorter than 3 or nonpositive
// data.
double fit_rate(std::span<const double> n, std::span<const double> e, int window);
double fit_rate_total(const AfemTrace& trace, int window);

}  // namespace fracopt

#endif
