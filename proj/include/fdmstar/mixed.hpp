#pragma once

#include "fdmstar/elasticity.hpp"
#include "fdmstar/sipg.hpp"

namespace fdmstar {

enum class MixedPair { QpDQ, RtDQ };

// Saddle-point system
//   [ A  B^T ] [u]   [f]
//   [ B  -C  ] [p] = [g]
// with A = 2 mu eps(v):eps(u) (plus tangential SIPG terms for the
// H(div)-conforming pair), B the divergence coupling, and C = M_p / lambda
// (absent at lambda = inf). Displacement Dirichlet DOFs are eliminated
// strongly; B carries no columns for them.
struct MixedSystem {
  MixedPair pair = MixedPair::QpDQ;
  double mu = 1.0;
  double lambda = 1.0;  // +inf for the incompressible limit
  double eta = 0.0;     // SIPG penalty (RT pair)
  std::shared_ptr<Discretization> disp;
  std::shared_ptr<Discretization> pres;
  std::shared_ptr<GlobalOperator> A;
  SpMat B;  // n_p x n_u
  Eigen::VectorXd Mp_diag;

  int n_u() const { return disp->ndof; }
  int n_p() const { return pres->ndof; }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  LinOp applier() const;

  // Pointwise divergence coefficients of a displacement field: M_p^{-1} B u.
  Eigen::VectorXd divergence_coefficients(const Eigen::VectorXd& u) const;
};

// The displacement operator of the H(div) pair: volume Kronecker blocks with
// the contravariant Piola scaling plus full vector interior-penalty facet
// blocks by facet quadrature. Cartesian meshes only.
GlobalOperator rt_operator(const Discretization& disc, const Bundle1D& normal,
                           const Bundle1D& tangent, double mu, double eta);

// Per-component separable surrogate of the H(div) displacement block in the
// FDM bases (normal axis CG degree p, tangential DG degree p-1), including
// the tangential interior-penalty terms.
TransformedSystem rt_sdc_transformed(const Discretization& disc, const Bundle1D& normal,
                                     const Bundle1D& tangent, double mu, double eta);

MixedSystem build_mixed_system(const Mesh& mesh, MixedPair pair, int p, double mu,
                               double lambda);

// Block preconditioner: P1 = two-level on the displacement block, P2 =
// point-Jacobi on the scaled pressure mass (1/mu + 1/lambda) M_p.
struct BlockPrecond {
  bool full = false;  // diag for MINRES, full (triangular product) for GMRES
  const MixedSystem* sys = nullptr;
  TwoLevel P1;
  Eigen::VectorXd P2_inv_diag;

  Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
  LinOp applier() const;
};

BlockPrecond build_block_precond(const MixedSystem& sys, bool full,
                                 const SolverConfig& config);

Eigen::VectorXd mixed_load(const MixedSystem& sys,
                           const std::function<Eigen::VectorXd(const Eigen::Vector3d&)>& body);

}  // namespace fdmstar
