#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <tuple>
#include <vector>

#include "fdmstar/discretization.hpp"
#include "fdmstar/fdm_basis.hpp"
#include "fdmstar/geometry.hpp"
#include "fdmstar/kron.hpp"
#include "fdmstar/sparse.hpp"

namespace fdmstar {

// One-dimensional ingredient operators of an interval family, plus the FDM
// modes expressed in that family's nodal representation.
struct Bundle1D {
  Family1D family = Family1D::CG;
  int degree = 0;
  ReferenceInterval ref;
  FdmBasis fdm;
  Eigen::MatrixXd C;  // C_ij = int phi_i phi'_j
};

Bundle1D make_bundle(Family1D family, int degree);

// Matrix-free symmetric operator: sum of cell blocks plus facet blocks, with
// identity rows on strongly constrained DOFs. Blocks may be Kronecker terms
// (factor matrices per axis) or dense; accumulation runs in ascending cell
// then facet order so results are reproducible.
struct GlobalOperator {
  const Discretization* disc = nullptr;

  struct CellTerm {
    std::vector<std::tuple<int, int, KronOperator>> kron_blocks;  // (ci, cj, op)
    Eigen::MatrixXd dense;  // over component-concatenated cell dofs, if nonzero
  };
  struct FacetTerm {
    int facet = -1;
    // (r, s, ci, cj, op): block from side s, component cj to side r, component ci
    std::vector<std::tuple<int, int, int, int, KronOperator>> kron_blocks;
    Eigen::MatrixXd dense;  // over [side0 comps; side1 comps] concatenated dofs
  };

  std::vector<CellTerm> cells;
  std::vector<FacetTerm> facets;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  SpMat assemble() const;            // identity rows/cols on constrained DOFs
  Eigen::MatrixXd assemble_dense() const;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> applier() const;
};

// Global change of basis to the FDM modes: x_nodal = S x_modes applied
// cell-wise with multiplicity weights, and the transformed sparse matrix
// with its structural pattern (identity rows on constrained DOFs).
struct TransformedSystem {
  const Discretization* disc = nullptr;
  std::vector<std::array<Eigen::MatrixXd, 3>> S_axis;   // [component][axis]
  std::vector<std::array<Eigen::VectorXd, 3>> parity_axis;
  SpMat At;
  Eigen::VectorXd inv_multiplicity;

  Eigen::VectorXd apply_S(const Eigen::VectorXd& modes) const;
  Eigen::VectorXd apply_St(const Eigen::VectorXd& nodal) const;
  // Per-lattice parity signs of the modal index map for one cell (+-1).
  Eigen::VectorXd mode_signs(int ci, int cell) const;
};

// --- scalar Poisson -------------------------------------------------------

// Separable cell stiffness: sum over axes of mu[a] * (A on axis a, B else).
KronOperator cell_matrix_cartesian(const ReferenceInterval& ref, const Eigen::VectorXd& mu);

// Exact (up to quadrature) cell stiffness for the true form on any cell map;
// agrees with the separable path on Cartesian cells.
Eigen::MatrixXd cell_matrix_quadrature(const Mesh& mesh, int cell,
                                       const ReferenceInterval& ref);

// Volume term for one scalar component on one cell: Kronecker terms on
// Cartesian/affine cells, a quadrature block otherwise.
GlobalOperator::CellTerm scalar_cell_term(const Mesh& mesh, int cell, const Bundle1D& bundle,
                                          const CellGeometry& geom);

// True-form operator for a continuous scalar space (Kronecker terms on
// Cartesian/affine cells, quadrature blocks otherwise).
GlobalOperator poisson_operator(const Discretization& disc, const Bundle1D& bundle);

// Surrogate/FDM-transformed matrix for the same space. eliminate=false keeps
// the full operator pattern (no identity rows), for structural counting.
TransformedSystem transformed_poisson(const Discretization& disc, const Bundle1D& bundle,
                                      bool eliminate = true);

// Load vector for f given at physical points (volume term only).
Eigen::VectorXd load_vector(const Discretization& disc, const Bundle1D& bundle,
                            const std::function<double(const Eigen::Vector3d&)>& f);

// Assembles A = sum_K R_K^T A^K R_K (+ facet sums) from a prepared operator.
SpMat assemble_global(const GlobalOperator& op);

// Applies homogeneous strong Dirichlet data to a right-hand side.
void zero_constrained(const Discretization& disc, Eigen::VectorXd& f);

}  // namespace fdmstar
