#include "fdmstar/dense_eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fdmstar {

std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_sym_eig(Eigen::MatrixXd A) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  if (n == 1) return {Eigen::VectorXd::Constant(1, A(0, 0)), V};

  const double tol = 1e-12;
  for (int sweep = 0; sweep < 30; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(A(p, q)));
    if (off <= tol) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        // Skip rotations already at the roundoff floor of their 2x2 block.
        if (std::abs(apq) <=
            1e-17 * std::sqrt(std::abs(A(p, p) * A(q, q)) + 1e-300))
          continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  Eigen::VectorXd lambda = A.diagonal();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lambda[a] < lambda[b]; });
  Eigen::VectorXd ls(n);
  Eigen::MatrixXd Vs(n, n);
  for (int j = 0; j < n; ++j) {
    ls[j] = lambda[order[j]];
    Vs.col(j) = V.col(order[j]);
  }
  return {ls, Vs};
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> dense_sym_gen_eig(
    const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != B.rows() || A.rows() != A.cols() || B.rows() != B.cols())
    throw std::invalid_argument("dense_sym_gen_eig: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("dense_sym_gen_eig: B is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  // C = L^{-1} A L^{-T}, then A V = B V Lambda with V = L^{-T} Q.
  Eigen::MatrixXd C = L.triangularView<Eigen::Lower>().solve(A);
  C = L.triangularView<Eigen::Lower>().solve(C.transpose().eval());
  C = 0.5 * (C + C.transpose().eval());

  auto [lambda, Q] = jacobi_sym_eig(C);
  Eigen::MatrixXd V =
      L.transpose().triangularView<Eigen::Upper>().solve(Q);

  // B-normalize and fix signs: largest-magnitude entry positive.
  for (int j = 0; j < V.cols(); ++j) {
    const double nrm = std::sqrt(V.col(j).dot(B * V.col(j)));
    V.col(j) /= nrm;
    int imax = 0;
    V.col(j).cwiseAbs().maxCoeff(&imax);
    if (V(imax, j) < 0) V.col(j) *= -1.0;
  }
  return {lambda, V};
}

}  // namespace fdmstar
