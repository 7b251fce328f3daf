#pragma once

#include "fdmstar/assembly.hpp"

namespace fdmstar {

// Penalty coefficient (p+1)(p+d) that keeps the interior-penalty form coercive.
double sipg_default_eta(int p, int d);

// One-dimensional facet matrices along the facet-normal axis. Traces and
// outward normal derivatives come from the family's reference interval; side
// is -1/+1. mu carries the cell's separable coefficient for the normal axis.
Eigen::MatrixXd sipg_facet_dirichlet(const ReferenceInterval& ref, double mu_e,
                                     double eta, int side);
// 2(p+1) square over [cell0 modes; cell1 modes].
Eigen::MatrixXd sipg_facet_interior(const ReferenceInterval& ref, double mu0, double mu1,
                                    double eta, int side0, int side1);

// Transformed counterparts with structural sparsity: value traces of the FDM
// modes are exact deltas at the interface slots, so each term contributes a
// single entry, one row, and one column.
Eigen::SparseMatrix<double> sipg_facet_dirichlet_t(const FdmBasis& fdm, double mu_e,
                                                   double eta, int side);
Eigen::SparseMatrix<double> sipg_facet_interior_t(const FdmBasis& fdm, double mu0,
                                                  double mu1, double eta, int side0,
                                                  int side1, int block_r, int block_s);

// Reflection of the transformed tangential mass across a flipped facet:
// S^T B (J S) = B_t Pi with Pi the parity/interface-swap matrix.
Eigen::SparseMatrix<double> reflected_mass_t(const FdmBasis& fdm);

// True-form SIPG operator for the discontinuous scalar space (weak Dirichlet
// BCs on facets tagged Dirichlet; Neumann facets carry no terms).
GlobalOperator dg_poisson_operator(const Discretization& disc, const Bundle1D& bundle,
                                   double eta);

TransformedSystem transformed_dg_poisson(const Discretization& disc, const Bundle1D& bundle,
                                         double eta);

// Weak Dirichlet data lift: eta-weighted penalty and adjoint-consistency
// terms on Gamma_D, added to the volume load.
Eigen::VectorXd dg_dirichlet_load(const Discretization& disc, const Bundle1D& bundle,
                                  double eta,
                                  const std::function<double(const Eigen::Vector3d&)>& u0);

}  // namespace fdmstar
