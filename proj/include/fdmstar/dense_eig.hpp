#pragma once

#include <Eigen/Dense>
#include <utility>

namespace fdmstar {

// Generalized symmetric-definite eigenproblem A V = B V diag(lambda).
// Reduces to a standard problem by dense Cholesky of B, solves it with a
// cyclic Jacobi sweep, and back-transforms. Eigenvalues ascending; columns
// B-orthonormal with the largest-magnitude entry of each made positive.
// Throws std::invalid_argument if B is not positive definite.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> dense_sym_gen_eig(
    const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Standard symmetric eigenproblem by cyclic Jacobi rotations.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_sym_eig(Eigen::MatrixXd A);

}  // namespace fdmstar
