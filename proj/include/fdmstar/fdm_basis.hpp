#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fdmstar/reference_interval.hpp"

namespace fdmstar {

// One-dimensional basis that simultaneously diagonalizes the interior blocks
// of the reference stiffness and mass matrices. Mode slots keep the nodal
// index layout: slot 0 is the left interface function, slots 1..p-1 are the
// interior eigenmodes (eigenvalues ascending), slot p is the right interface
// function. The transformed operators are stored with their structural
// sparsity pattern: no entry is created outside
//   stiffness: interior diagonal + interior-interface rows/cols + 2x2 interface
//   mass:      interior identity + 2x2 interface block
// so non-zero counts downstream are exact by construction.
struct FdmBasis {
  int degree = 0;
  Eigen::MatrixXd S;       // (p+1)^2, nodal coefficients of the modes
  Eigen::VectorXd lambda;  // p-1 interior eigenvalues, ascending
  Eigen::SparseMatrix<double> A_t;  // S^T A_hat S
  Eigen::SparseMatrix<double> B_t;  // S^T B_hat S
  Eigen::MatrixXd deriv_traces;     // 2 x (p+1): outward derivative of each mode
  // Value traces are exact deltas: mode 0 -> 1 at x=-1, mode p -> 1 at x=+1.
  Eigen::VectorXd parity;  // per mode: s_j(-x) = parity[j] * s_j(x); +1 at the end slots
};

// Requires a GLL-nodal reference (the canonical nodal space).
FdmBasis fdm_basis(const ReferenceInterval& ref);

// Values of the FDM modes at the p+1 Gauss-Legendre points, i.e. the modes'
// coefficients in the GL nodal basis used by discontinuous spaces.
Eigen::MatrixXd interpolate_to_gl(const FdmBasis& fdm, const ReferenceInterval& ref);

// Same modes re-expressed in the GL nodal representation (S replaced, all
// transformed operators and traces unchanged).
FdmBasis to_gl_representation(const FdmBasis& fdm, const ReferenceInterval& ref);

}  // namespace fdmstar
