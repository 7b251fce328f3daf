#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

namespace fdmstar {

// Sum of scaled Kronecker products of small dense factors. Factors are
// listed per axis, axis 0 fastest-running in the flattened index, so a
// term {M0, M1, M2} applies M0 along axis 0, M1 along axis 1, etc.
// (equal to coeff * M2 (x) M1 (x) M0 as an explicit Kronecker product).
struct KronTerm {
  double coeff = 1.0;
  std::vector<Eigen::MatrixXd> factors;
};

struct KronOperator {
  std::vector<int> dims;  // per-axis sizes of the input tensor
  std::vector<KronTerm> terms;
  int rows() const;
  int cols() const;
};

// Applies a single matrix along one axis of the flattened tensor x.
Eigen::VectorXd apply_axis(const Eigen::MatrixXd& M, const Eigen::VectorXd& x,
                           const std::vector<int>& dims, int axis);

Eigen::VectorXd kron_apply(const KronOperator& op, const Eigen::VectorXd& x);

// Explicit Kronecker products (small sizes; assembly and test oracles).
Eigen::MatrixXd dense_kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
Eigen::SparseMatrix<double> sparse_kron(const Eigen::SparseMatrix<double>& A,
                                        const Eigen::SparseMatrix<double>& B);

// Materializes the operator as a dense matrix.
Eigen::MatrixXd kron_materialize(const KronOperator& op);

}  // namespace fdmstar
