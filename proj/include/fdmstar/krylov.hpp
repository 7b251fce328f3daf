#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

namespace fdmstar {

using LinOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct KrylovReport {
  int iterations = 0;
  std::vector<double> residuals;  // relative Euclidean residual per iteration
  double kappa = 0.0;             // CG-Lanczos estimate (pcg only)
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool converged = false;
  double wall_time = 0.0;
};

// Preconditioned conjugate gradients from a zero initial guess, stopping on
// ||r_k|| / ||r_0|| <= rtol. The Lanczos tridiagonal assembled from the CG
// scalars provides the condition-number estimate.
std::pair<Eigen::VectorXd, KrylovReport> pcg(const LinOp& A, const LinOp& Pinv,
                                             const Eigen::VectorXd& b, double rtol,
                                             int maxit);

// MINRES with an SPD preconditioner; stops on the true (unpreconditioned)
// residual so iteration counts are comparable with pcg.
std::pair<Eigen::VectorXd, KrylovReport> minres(const LinOp& A, const LinOp& Pinv,
                                                const Eigen::VectorXd& b, double rtol,
                                                int maxit);

// Restarted GMRES with right preconditioning (residual norms are true norms).
std::pair<Eigen::VectorXd, KrylovReport> gmres_restarted(const LinOp& A, const LinOp& Pinv,
                                                         const Eigen::VectorXd& b,
                                                         int restart, double rtol,
                                                         int maxit);

// Extremal eigenvalues of the symmetric tridiagonal with diagonal alpha and
// off-diagonal beta (Lanczos matrices are tiny; dense solve).
std::pair<double, double> tridiag_extremes(const std::vector<double>& diag,
                                           const std::vector<double>& off);

}  // namespace fdmstar
