#include "fracopt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fracopt {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

SparseSpd SparseSpd::from_triplets(int n, std::vector<int> rows, std::vector<int> cols,
                                   std::vector<double> values) {
  if (rows.size() != cols.size() || rows.size() != values.size())
    throw DimensionMismatch("triplet arrays disagree in length");
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a] != rows[b]) return rows[a] < rows[b];
    return cols[a] < cols[b];
  });

  SparseSpd m;
  m.n_ = n;
  m.row_ptr_.assign(n + 1, 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t t = order[k];
    if (rows[t] < 0 || rows[t] >= n || cols[t] < 0 || cols[t] >= n)
      throw DimensionMismatch("triplet index out of range");
    if (!m.col_.empty() && rows[t] == rows[order[k - 1]] && cols[t] == cols[order[k - 1]]) {
      m.val_.back() += values[t];
    } else {
      m.col_.push_back(cols[t]);
      m.val_.push_back(values[t]);
      m.row_ptr_[rows[t] + 1]++;
    }
  }
  for (int i = 0; i < n; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
  m.validate();
  return m;
}

SparseSpd SparseSpd::from_csr(int n, std::vector<int> row_ptr, std::vector<int> col,
                              std::vector<double> val) {
  if (static_cast<int>(row_ptr.size()) != n + 1 || col.size() != val.size() ||
      static_cast<std::size_t>(row_ptr.back()) != col.size())
    throw DimensionMismatch("inconsistent CSR arrays");
  SparseSpd m;
  m.n_ = n;
  m.row_ptr_ = std::move(row_ptr);
  m.col_ = std::move(col);
  m.val_ = std::move(val);
  m.validate();
  return m;
}

double SparseSpd::entry(int i, int j) const {
  const int b = row_ptr_[i], e = row_ptr_[i + 1];
  auto it = std::lower_bound(col_.begin() + b, col_.begin() + e, j);
  if (it != col_.begin() + e && *it == j) return val_[it - col_.begin()];
  return 0.0;
}

void SparseSpd::validate() const {
  double max_abs = 0.0;
  for (double v : val_) max_abs = std::max(max_abs, std::abs(v));
  for (int i = 0; i < n_; ++i) {
    bool has_diag = false;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const int j = col_[k];
      if (j == i) {
        has_diag = true;
        if (val_[k] <= 0.0) throw ValidationError("nonpositive diagonal entry");
      }
      if (std::abs(val_[k] - entry(j, i)) > 1e-12 * std::max(1.0, max_abs))
        throw ValidationError("matrix is not symmetric");
    }
    if (!has_diag) throw ValidationError("missing diagonal entry");
  }
}

void SparseSpd::multiply(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) != n_ || static_cast<int>(y.size()) != n_)
    throw DimensionMismatch("multiply: vector length does not match dimension");
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * x[col_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseSpd::diagonal() const {
  std::vector<double> d(n_);
  for (int i = 0; i < n_; ++i) d[i] = entry(i, i);
  return d;
}

CgResult cg_solve(const SparseSpd& A, std::span<const double> b, const CgOptions& opts) {
  const int n = A.dimension();
  if (static_cast<int>(b.size()) != n)
    throw DimensionMismatch("cg_solve: rhs length does not match matrix dimension");
  if (opts.tol <= 0.0) throw ValidationError("cg_solve: tolerance must be positive");
  const int maxit = opts.maxit < 0 ? 10 * std::max(n, 1) : opts.maxit;

  CgResult res;
  res.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return res;

  std::vector<double> inv_diag;
  if (!opts.precond) {
    inv_diag = A.diagonal();
    for (double& d : inv_diag) d = 1.0 / d;
  }
  auto precondition = [&](std::span<const double> r, std::span<double> z) {
    if (opts.precond) {
      opts.precond->apply(r, z);
    } else {
      for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    }
  };

  std::vector<double> r(b.begin(), b.end());
  if (opts.x0) {
    if (static_cast<int>(opts.x0->size()) != n)
      throw DimensionMismatch("cg_solve: initial guess length mismatch");
    res.x = *opts.x0;
    std::vector<double> ax(n);
    A.multiply(res.x, ax);
    for (int i = 0; i < n; ++i) r[i] -= ax[i];
  }

  std::vector<double> z(n), p(n), ap(n);
  precondition(r, z);
  p = z;
  double rz = dot(r, z);
  double rnorm = norm2(r);

  for (int it = 0; it < maxit; ++it) {
    if (rnorm <= opts.tol * bnorm) {
      res.iterations = it;
      res.relative_residual = rnorm / bnorm;
      return res;
    }
    A.multiply(p, ap);
    const double pap = dot(p, ap);
    if (pap <= 0.0) throw NotPositiveDefinite("cg_solve: matrix is not positive definite");
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    precondition(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rnorm = norm2(r);
  }
  if (rnorm <= opts.tol * bnorm) {
    res.iterations = maxit;
    res.relative_residual = rnorm / bnorm;
    return res;
  }
  throw NonConvergence("cg_solve: no convergence after " + std::to_string(maxit) +
                       " iterations (rel. residual " + std::to_string(rnorm / bnorm) + ")");
}

void DenseSpd::check_symmetric(double rel_tol) const {
  double max_abs = 0.0;
  for (double v : a_) max_abs = std::max(max_abs, std::abs(v));
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (std::abs(at(i, j) - at(j, i)) > rel_tol * std::max(1.0, max_abs))
        throw ValidationError("dense matrix is not symmetric");
}

DenseCholesky::DenseCholesky(const DenseSpd& A) : n_(A.dimension()) {
  l_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
  row_start_.assign(n_, 0);
  for (int i = 0; i < n_; ++i) {
    int f = 0;
    while (f < i && A.at(i, f) == 0.0) ++f;
    row_start_[i] = f;
  }
  // Left-looking Cholesky restricted to the row envelope. The factor of row i
  // cannot start before column row_start_[i], so inner products skip the
  // leading zeros.
  for (int i = 0; i < n_; ++i) {
    for (int j = row_start_[i]; j <= i; ++j) {
      const int lo = std::max(row_start_[i], row_start_[j]);
      double s = A.at(i, j);
      for (int k = lo; k < j; ++k)
        s -= l_[static_cast<std::size_t>(i) * n_ + k] * l_[static_cast<std::size_t>(j) * n_ + k];
      if (i == j) {
        if (s <= 0.0)
          throw NotPositiveDefinite("dense factorization hit a nonpositive pivot at row " +
                                    std::to_string(i));
        l_[static_cast<std::size_t>(i) * n_ + i] = std::sqrt(s);
      } else {
        l_[static_cast<std::size_t>(i) * n_ + j] = s / l_[static_cast<std::size_t>(j) * n_ + j];
      }
    }
  }
}

std::vector<double> DenseCholesky::solve(std::span<const double> b) const {
  if (static_cast<int>(b.size()) != n_)
    throw DimensionMismatch("dense solve: rhs length does not match dimension");
  std::vector<double> y(b.begin(), b.end());
  for (int i = 0; i < n_; ++i) {
    double s = y[i];
    for (int k = row_start_[i]; k < i; ++k) s -= l_[static_cast<std::size_t>(i) * n_ + k] * y[k];
    y[i] = s / l_[static_cast<std::size_t>(i) * n_ + i];
  }
  for (int i = n_ - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n_; ++k)
      if (row_start_[k] <= i) s -= l_[static_cast<std::size_t>(k) * n_ + i] * y[k];
    y[i] = s / l_[static_cast<std::size_t>(i) * n_ + i];
  }
  return y;
}

std::vector<double> dense_solve(const DenseSpd& A, std::span<const double> b) {
  return DenseCholesky(A).solve(b);
}

}  // namespace fracopt
