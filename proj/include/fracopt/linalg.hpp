#ifndef FRACOPT_LINALG_HPP
#define FRACOPT_LINALG_HPP

#include <span>
#include <vector>

#include "fracopt/errors.hpp"

namespace fracopt {

// Symmetric positive definite matrix in compressed sparse row storage.
// Both triangles are stored; construction checks symmetry and positive
// diagonal entries.
class SparseSpd {
public:
  SparseSpd() = default;

  // Builds from (row, col, value) triplets; duplicate entries are summed.
  static SparseSpd from_triplets(int n, std::vector<int> rows, std::vector<int> cols,
                                 std::vector<double> values);

  // Builds directly from a fixed sparsity pattern. cols within a row must be
  // strictly increasing. Symmetry is still verified.
  static SparseSpd from_csr(int n, std::vector<int> row_ptr, std::vector<int> col,
                            std::vector<double> val);

  int dimension() const { return n_; }
  std::size_t nnz() const { return col_.size(); }

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
  double entry(int i, int j) const;  // 0 if absent

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col() const { return col_; }
  const std::vector<double>& val() const { return val_; }
  std::vector<double>& mutable_val() { return val_; }

private:
  void validate() const;

  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_;
  std::vector<double> val_;
};

// Dense SPD matrix, row-major.
class DenseSpd {
public:
  DenseSpd() = default;
  explicit DenseSpd(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

  int dimension() const { return n_; }
  double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const std::vector<double>& values() const { return a_; }

  void check_symmetric(double rel_tol = 1e-12) const;

private:
  int n_ = 0;
  std::vector<double> a_;
};

// Symmetric positive preconditioner interface; z receives an approximation
// of A^{-1} r. The default inside cg_solve is the Jacobi (diagonal) scaling.
class Preconditioner {
public:
  virtual ~Preconditioner() = default;
  virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
};

struct CgOptions {
  double tol = 1e-10;   // relative residual
  int maxit = -1;       // < 0 means 10 * dimension
  const std::vector<double>* x0 = nullptr;
  const Preconditioner* precond = nullptr;  // nullptr selects Jacobi
};

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

// Jacobi-preconditioned conjugate gradients. Throws NonConvergence when the
// iteration budget is exhausted, DimensionMismatch on inconsistent sizes.
CgResult cg_solve(const SparseSpd& A, std::span<const double> b, const CgOptions& opts = {});

// Cholesky factorization of a dense SPD matrix. The factorization skips the
// leading zero profile of each row, so matrices ordered with a small envelope
// (the star-local systems) factor in O(n * band^2).
class DenseCholesky {
public:
  explicit DenseCholesky(const DenseSpd& A);
  std::vector<double> solve(std::span<const double> b) const;
  int dimension() const { return n_; }

private:
  int n_ = 0;
  std::vector<double> l_;        // row-major lower factor
  std::vector<int> row_start_;   // first nonzero column per row
};

// One-shot direct solve; residual is ~1e-14 relative for well-scaled systems.
std::vector<double> dense_solve(const DenseSpd& A, std::span<const double> b);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace fracopt

#endif
