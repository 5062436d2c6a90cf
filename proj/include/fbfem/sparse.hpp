#pragma once

// Symmetric sparse matrices in CSR form and a diagonally preconditioned
// conjugate gradient solver. Assembly and solves are single-threaded and
// bit-reproducible: triplets are accumulated in a stable canonical order and
// CG uses a fixed iteration sequence.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbfem {

struct Triplet {
  int row;
  int col;
  double value;
};

struct SparseOperator {
  int dim = 0;
  std::vector<int> row_ptr;  // size dim+1
  std::vector<int> col;
  std::vector<double> val;

  // Duplicate (row,col) triplets are summed in insertion order.
  static SparseOperator from_triplets(int dim, std::vector<Triplet> ts) {
    std::stable_sort(ts.begin(), ts.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseOperator op;
    op.dim = dim;
    op.row_ptr.assign(dim + 1, 0);
    for (size_t k = 0; k < ts.size();) {
      size_t j = k;
      double s = 0.0;
      while (j < ts.size() && ts[j].row == ts[k].row && ts[j].col == ts[k].col) {
        s += ts[j].value;
        ++j;
      }
      if (ts[k].row < 0 || ts[k].row >= dim || ts[k].col < 0 || ts[k].col >= dim)
        throw std::runtime_error("from_triplets: index out of range");
      op.col.push_back(ts[k].col);
      op.val.push_back(s);
      op.row_ptr[ts[k].row + 1]++;
      k = j;
    }
    for (int i = 0; i < dim; ++i) op.row_ptr[i + 1] += op.row_ptr[i];
    return op;
  }

  std::vector<double> matvec(const std::vector<double>& x) const {
    if ((int)x.size() != dim) throw std::runtime_error("matvec: dimension mismatch");
    std::vector<double> y(dim, 0.0);
    for (int i = 0; i < dim; ++i) {
      double s = 0.0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
      y[i] = s;
    }
    return y;
  }

  double row_dot(int i, const std::vector<double>& x) const {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
    return s;
  }

  double entry(int i, int j) const {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      if (col[k] == j) return val[k];
    return 0.0;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(dim, 0.0);
    for (int i = 0; i < dim; ++i) d[i] = entry(i, i);
    return d;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : val) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_symmetric(double rel_tol = 1e-12) const {
    double scale = std::max(max_abs(), 1e-300);
    for (int i = 0; i < dim; ++i)
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        if (std::abs(val[k] - entry(col[k], i)) > rel_tol * scale) return false;
    return true;
  }

  // Rows and columns restricted to `ids` (sorted ascending), reindexed 0..n-1.
  SparseOperator submatrix(const std::vector<int>& ids) const {
    std::vector<int> where(dim, -1);
    for (size_t k = 0; k < ids.size(); ++k) where[ids[k]] = (int)k;
    std::vector<Triplet> ts;
    for (size_t r = 0; r < ids.size(); ++r) {
      int i = ids[r];
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        if (where[col[k]] >= 0)
          ts.push_back({(int)r, where[col[k]], val[k]});
    }
    return from_triplets((int)ids.size(), std::move(ts));
  }
};

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Jacobi-preconditioned CG for symmetric positive definite operators.
// Throws on indefiniteness (p'Ap <= 0); an exhausted iteration budget is
// reported through `converged` and the achieved residual.
inline CgResult cg_solve(const SparseOperator& A, const std::vector<double>& b,
                         double rel_tol = 1e-10, int max_iterations = -1,
                         const std::vector<double>* x0 = nullptr) {
  int n = A.dim;
  if ((int)b.size() != n) throw std::runtime_error("cg_solve: rhs dimension mismatch");
  if (max_iterations < 0) max_iterations = 10 * n + 100;

  CgResult res;
  res.x.assign(n, 0.0);
  if (x0 != nullptr) res.x = *x0;

  std::vector<double> d = A.diagonal();
  for (double& v : d)
    if (v <= 0.0) v = 1.0;

  std::vector<double> r = b;
  if (x0 != nullptr) {
    std::vector<double> ax = A.matvec(res.x);
    for (int i = 0; i < n; ++i) r[i] -= ax[i];
  }
  double bnorm = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  if (bnorm == 0.0) {
    res.x.assign(n, 0.0);
    res.converged = true;
    return res;
  }

  std::vector<double> z(n), p(n), ap(n);
  for (int i = 0; i < n; ++i) z[i] = r[i] / d[i];
  p = z;
  double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
  double rnorm = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));

  int it = 0;
  while (rnorm / bnorm > rel_tol && it < max_iterations) {
    ap = A.matvec(p);
    double pap = std::inner_product(p.begin(), p.end(), ap.begin(), 0.0);
    if (pap <= 0.0)
      throw std::runtime_error("cg_solve: operator not positive definite (p'Ap <= 0)");
    double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    for (int i = 0; i < n; ++i) z[i] = r[i] / d[i];
    double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rnorm = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
    ++it;
  }
  res.iterations = it;
  res.rel_residual = rnorm / bnorm;
  res.converged = rnorm / bnorm <= rel_tol;
  return res;
}

}  // namespace fbfem
