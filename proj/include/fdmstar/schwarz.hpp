#pragma once

#include <memory>
#include <string>

#include "fdmstar/assembly.hpp"
#include "fdmstar/cholesky.hpp"
#include "fdmstar/krylov.hpp"

namespace fdmstar {

enum class DampingFormula {
  TwoGrid,   // omega = 2/(mu_c + lmax), mu_c from a trial-cycle probe (default)
  Smoother,  // omega = 2/(lmin + lmax) of the smoothed operator
  Paper,     // omega = (lmax + lmin)/2 of the smoothed operator
};

struct SolverConfig {
  bool damping_auto = true;
  double damping_value = 1.0;
  DampingFormula damping_formula = DampingFormula::TwoGrid;
  int lanczos_steps = 10;
  unsigned seed = 0x5EED;
  bool skip_boundary_patches = false;
  int coarse_degree = 1;  // 2 for Raviart-Thomas
  int threads = 1;
};

// Additive Schwarz over vertex-star patches of the transformed matrix: each
// patch holds its extracted matrix factored under the interior-first patch
// ordering. Patches are solved independently; the additive sum accumulates
// in ascending vertex order regardless of the thread count.
struct PatchSolver {
  struct Patch {
    int vertex = -1;
    std::vector<int> dofs;
    CholFactor factor;
  };
  int ndof = 0;
  int threads = 1;
  std::vector<Patch> patches;

  Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
  std::int64_t factor_nnz() const;
};

PatchSolver build_patch_solver(const Discretization& disc, const SpMat& At,
                               const SolverConfig& config);

// Hybrid two-level scheme: damped additive Schwarz in the FDM basis as the
// fine relaxation, multiplicative coarse correction with the true form.
struct TwoLevel {
  LinOp A;
  std::shared_ptr<const TransformedSystem> sys;
  PatchSolver patches;
  double omega = 1.0;
  double lambda_min = 0.0, lambda_max = 0.0;
  SpMat prolong;  // fine x coarse
  std::shared_ptr<const CholFactor> coarse;

  // P_smooth^{-1} r = S asm(S^T r)
  Eigen::VectorXd smooth(const Eigen::VectorXd& r) const;
  // V(1,1): damped smooth, coarse correction, damped smooth.
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
  LinOp applier() const;
};

struct DampingEstimate {
  double omega = 1.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

// Extremal eigenvalues of P^{-1} A from a fixed-seed CG-Lanczos probe.
DampingEstimate estimate_damping(const LinOp& P_smooth, const LinOp& A, int n,
                                 const SolverConfig& config,
                                 const Discretization* disc = nullptr);

// Sets tl.omega. The default two-grid calibration runs a second probe with a
// trial V(1,1) at omega0 = 1/lmax to recover the smallest smoother eigenvalue
// on the complement of the coarse space, then applies the optimal Richardson
// formula on [mu_c, lmax].
void calibrate_damping(TwoLevel& tl, const Discretization& disc, const SolverConfig& config);

// Prolongation by nodal interpolation: coarse-basis values at the fine
// collocation nodes per component and axis, assembled cell-wise with fine
// multiplicity weights; constrained rows/columns are dropped.
SpMat build_prolongation(const Discretization& fine, const Discretization& coarse,
                         const std::vector<std::array<Eigen::MatrixXd, 3>>& phat);

// Complete solver tree for the continuous (or DG) scalar Poisson problem.
TwoLevel build_poisson_twolevel(const Discretization& disc, const Bundle1D& bundle,
                                std::shared_ptr<const GlobalOperator> A,
                                const SolverConfig& config);

}  // namespace fdmstar
