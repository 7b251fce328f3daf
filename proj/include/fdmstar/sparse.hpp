#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <iosfwd>
#include <string>

namespace fdmstar {

// Compressed-row storage; symmetric matrices are stored full.
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Sparse matrix-vector product with deterministic, index-ordered accumulation.
Eigen::VectorXd spmv(const SpMat& A, const Eigen::VectorXd& x);

// Rows/columns of A restricted to the given index list (in its order).
SpMat extract_submatrix(const SpMat& A, const std::vector<int>& dofs);

// Matrix Market coordinate output; "symmetric" writes the lower triangle only.
void write_matrix_market(std::ostream& os, const SpMat& A, bool symmetric);
void write_matrix_market(const std::string& path, const SpMat& A, bool symmetric);

}  // namespace fdmstar
