#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fdmstar/ordering.hpp"
#include "fdmstar/sparse.hpp"

namespace fdmstar {

// Sparse Cholesky factor P A P^T = L L^T with the pattern from
// elimination-tree analysis under the caller's ordering. L is stored by
// columns (diagonal entry first, off-diagonals in ascending row order).
struct CholFactor {
  int n = 0;
  std::vector<int> perm;  // permuted index -> original index
  std::vector<std::int64_t> colptr;
  std::vector<int> rowind;
  std::vector<double> values;
  std::int64_t flops = 0;  // multiply-adds in the numeric factorization

  std::int64_t nnz() const { return static_cast<std::int64_t>(values.size()); }
  std::int64_t col_nnz(int j) const { return colptr[j + 1] - colptr[j]; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
};

// Up-looking factorization. Throws std::runtime_error naming the pivot if a
// non-positive pivot is hit (the matrix is not SPD under this ordering, e.g.
// an insufficient interior-penalty coefficient).
CholFactor cholesky(const SpMat& A, const Ordering& ord);

}  // namespace fdmstar
