#pragma once

#include "fdmstar/assembly.hpp"
#include "fdmstar/schwarz.hpp"

namespace fdmstar {

// Separable axis coefficients of the diagonal displacement block j:
// mu |grad u_j|^2 + (mu + lambda) |d_j u_j|^2, i.e. mu + (mu+lambda) on axis j.
Eigen::VectorXd sdc_axis_coefficients(int comp, int dim, double mu, double lambda);

// Dense vector-valued cell matrix of 2 mu eps(v):eps(u) + lambda div v div u
// on any cell map (component-major local ordering).
Eigen::MatrixXd elasticity_primal_cell(const Mesh& mesh, int cell, const Bundle1D& bundle,
                                       double mu, double lambda);

// True-form operator on a vector Q_p space: Kronecker blocks on Cartesian
// cells (including the cross-component terms), quadrature blocks otherwise.
GlobalOperator elasticity_primal_operator(const Discretization& disc, const Bundle1D& bundle,
                                          double mu, double lambda);

// Separate-displacement-components surrogate in the FDM basis: per-component
// separable forms, no cross-component coupling.
TransformedSystem sdc_transformed(const Discretization& disc, const Bundle1D& bundle,
                                  double mu, double lambda);

Eigen::VectorXd vector_load(const Discretization& disc, const Bundle1D& bundle,
                            const std::function<Eigen::VectorXd(const Eigen::Vector3d&)>& f);

// Two-level solver with SDC/FDM relaxation and a vector p=1 coarse space
// carrying the true form.
TwoLevel build_elasticity_twolevel(const Discretization& disc, const Bundle1D& bundle,
                                   std::shared_ptr<const GlobalOperator> A, double mu,
                                   double lambda, const SolverConfig& config);

}  // namespace fdmstar
