#ifndef FRACOPT_OPTIMIZER_HPP
#define FRACOPT_OPTIMIZER_HPP

#include <cstdint>
#include <optional>

#include "fracopt/assembly.hpp"

namespace fracopt {

struct ProblemData {
  double s = 0.5;
  double sigma = 0.1;  // Tikhonov weight
  double nu = 0.5;     // sparsity weight
  double a = -0.3;     // control bounds, a < 0 < b
  double b = 0.3;
  TraceFn u_d;  // desired state
  double theta = 0.5;  // marking parameter (consumed by the adaptive driver)

  void validate() const;
};

// Discrete optimal variables: state and adjoint on the cylinder, control and
// subgradient as cell constants on the base.
struct ControlQuadruple {
  std::vector<double> V, P;
  std::vector<double> Z, Lambda;
};

enum class CellLabel : std::uint8_t { Lower, Zero, FreeNeg, FreePos, Upper };

// Exact tridiagonal solves along each vertical dof line (one base vertex,
// all levels). The grading concentrates the stiffness in the y direction, so
// this removes the anisotropy from the CG iteration.
class LinePreconditioner : public Preconditioner {
public:
  LinePreconditioner(const SparseSpd& A, int levels);
  void apply(std::span<const double> r, std::span<double> z) const override;

private:
  int levels_ = 1;
  std::vector<double> inv_diag_, lower_;  // LDL^T factors, stored per dof
};

// Everything reusable for one mesh: the space and the stiffness matrix (the
// state and adjoint equations share it since the form is symmetric).
struct DiscreteSystem {
  TensorP1Space space;
  SparseSpd A;
  LinePreconditioner precond;
  double s;

  DiscreteSystem(ExtrudedMesh mesh, double s_);
};

std::vector<double> solve_state(const DiscreteSystem& sys, std::span<const double> Z,
                                const std::vector<double>* x0 = nullptr);
std::vector<double> solve_adjoint(const DiscreteSystem& sys, std::span<const double> V,
                                  const ProblemData& data, const std::vector<double>* x0 = nullptr);

// Mean of tr P over triangle K (exact: a P1 average is the vertex mean).
double cell_average_trace(const TensorP1Space& space, std::span<const double> trace_values, int K);

double project_subgradient(double q, double nu);
double project_control(double q, double lambda, const ProblemData& data);
CellLabel classify_cell(double q, const ProblemData& data);

struct ActiveSetOptions {
  int max_iterations = 100;  // total budget across damping stages
  double z_tol = 1e-10;      // L2 change between consecutive controls
};

struct ActiveSetResult {
  ControlQuadruple quad;
  std::vector<CellLabel> labels;
  int iterations = 0;
  double omega = 1.0;          // relaxation in effect at convergence
  int first_damped_sweep = -1; // history index where omega dropped below 1
  std::vector<double> objective_history;
};

// Fixed point of Z -> projections of the adjoint trace averages, stopped when
// the active-set labeling is stable and the control stops moving. Retries
// with under-relaxation (omega = 0.5, then 0.25) inside the same iteration
// budget; throws MaxIterations when the budget is exhausted.
ActiveSetResult active_set_solve(const DiscreteSystem& sys, const ProblemData& data,
                                 const std::vector<double>* warm_start = nullptr,
                                 const ActiveSetOptions& opts = {});

double objective(const DiscreteSystem& sys, const ControlQuadruple& quad,
                 const ProblemData& data);

}  // namespace fracopt

#endif
