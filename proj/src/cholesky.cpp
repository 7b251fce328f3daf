#include "fdmstar/cholesky.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fdmstar {

CholFactor cholesky(const SpMat& A, const Ordering& ord) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n) throw std::invalid_argument("cholesky: matrix not square");
  if (static_cast<int>(ord.perm.size()) != n)
    throw std::invalid_argument("cholesky: ordering size mismatch");

  std::vector<int> inv(n);
  for (int k = 0; k < n; ++k) inv[ord.perm[k]] = k;

  // Symbolic pass: elimination tree and per-column counts.
  std::vector<int> parent(n, -1), flag(n), colcount(n, 1);
  for (int k = 0; k < n; ++k) {
    flag[k] = k;
    const int r = ord.perm[k];
    for (SpMat::InnerIterator it(A, r); it; ++it) {
      int j = inv[it.col()];
      for (; j < k && flag[j] != k; j = parent[j]) {
        if (parent[j] == -1) parent[j] = k;
        ++colcount[j];
        flag[j] = k;
      }
    }
  }

  CholFactor F;
  F.n = n;
  F.perm = ord.perm;
  F.colptr.assign(n + 1, 0);
  for (int j = 0; j < n; ++j) F.colptr[j + 1] = F.colptr[j] + colcount[j];
  F.rowind.assign(F.colptr[n], 0);
  F.values.assign(F.colptr[n], 0.0);

  // Numeric pass (up-looking): row k of L solves L(0:k-1,:) l = a_k.
  std::vector<std::int64_t> cursor(F.colptr.begin(), F.colptr.end() - 1);
  std::vector<int> pattern(n), stack(n);
  std::vector<double> y(n, 0.0);
  std::fill(flag.begin(), flag.end(), -1);
  for (int k = 0; k < n; ++k) {
    flag[k] = k;
    double dk = 0.0;
    int top = n;
    const int r = ord.perm[k];
    for (SpMat::InnerIterator it(A, r); it; ++it) {
      const int j = inv[it.col()];
      if (j > k) continue;
      if (j == k) {
        dk = it.value();
        continue;
      }
      y[j] += it.value();
      int len = 0, i = j;
      for (; flag[i] != k; i = parent[i]) {
        stack[len++] = i;
        flag[i] = k;
      }
      while (len > 0) pattern[--top] = stack[--len];
    }
    for (int t = top; t < n; ++t) {
      const int j = pattern[t];
      const double yj = y[j];
      y[j] = 0.0;
      const double ljj = F.values[F.colptr[j]];
      const double lkj = yj / ljj;
      for (std::int64_t q = F.colptr[j] + 1; q < cursor[j]; ++q)
        y[F.rowind[q]] -= F.values[q] * lkj;
      F.flops += cursor[j] - F.colptr[j];
      F.rowind[cursor[j]] = k;
      F.values[cursor[j]] = lkj;
      ++cursor[j];
      dk -= lkj * lkj;
    }
    if (!(dk > 0.0))
      throw std::runtime_error("cholesky: matrix not SPD at pivot " + std::to_string(k));
    F.rowind[F.colptr[k]] = k;
    F.values[F.colptr[k]] = std::sqrt(dk);
    cursor[k] = F.colptr[k] + 1;
  }
  return F;
}

Eigen::VectorXd CholFactor::solve(const Eigen::VectorXd& b) const {
  if (b.size() != n) throw std::invalid_argument("CholFactor::solve: size mismatch");
  Eigen::VectorXd y(n);
  for (int k = 0; k < n; ++k) y[k] = b[perm[k]];
  // L y = Pb
  for (int j = 0; j < n; ++j) {
    const double xj = y[j] / values[colptr[j]];
    y[j] = xj;
    for (std::int64_t q = colptr[j] + 1; q < colptr[j + 1]; ++q)
      y[rowind[q]] -= values[q] * xj;
  }
  // L^T z = y
  for (int j = n - 1; j >= 0; --j) {
    double acc = y[j];
    for (std::int64_t q = colptr[j] + 1; q < colptr[j + 1]; ++q)
      acc -= values[q] * y[rowind[q]];
    y[j] = acc / values[colptr[j]];
  }
  Eigen::VectorXd x(n);
  for (int k = 0; k < n; ++k) x[perm[k]] = y[k];
  return x;
}

}  // namespace fdmstar
