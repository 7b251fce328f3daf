#include "fdmstar/kron.hpp"

#include <stdexcept>

namespace fdmstar {

int KronOperator::rows() const {
  if (terms.empty()) return 0;
  int n = 1;
  for (const auto& f : terms[0].factors) n *= static_cast<int>(f.rows());
  return n;
}

int KronOperator::cols() const {
  int n = 1;
  for (int d : dims) n *= d;
  return n;
}

Eigen::VectorXd apply_axis(const Eigen::MatrixXd& M, const Eigen::VectorXd& x,
                           const std::vector<int>& dims, int axis) {
  const int d = static_cast<int>(dims.size());
  if (axis < 0 || axis >= d) throw std::invalid_argument("apply_axis: bad axis");
  const int n = dims[axis];
  if (M.cols() != n) throw std::invalid_argument("apply_axis: shape mismatch");
  const int m = static_cast<int>(M.rows());
  int left = 1, right = 1;
  for (int k = 0; k < axis; ++k) left *= dims[k];
  for (int k = axis + 1; k < d; ++k) right *= dims[k];

  Eigen::VectorXd y(static_cast<Eigen::Index>(left) * m * right);
  for (int r = 0; r < right; ++r) {
    Eigen::Map<const Eigen::MatrixXd> X(x.data() + static_cast<Eigen::Index>(r) * left * n, left, n);
    Eigen::Map<Eigen::MatrixXd> Y(y.data() + static_cast<Eigen::Index>(r) * left * m, left, m);
    Y.noalias() = X * M.transpose();
  }
  return y;
}

Eigen::VectorXd kron_apply(const KronOperator& op, const Eigen::VectorXd& x) {
  if (x.size() != op.cols()) throw std::invalid_argument("kron_apply: shape mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(op.rows());
  for (const auto& term : op.terms) {
    if (static_cast<int>(term.factors.size()) != static_cast<int>(op.dims.size()))
      throw std::invalid_argument("kron_apply: term rank mismatch");
    Eigen::VectorXd t = x;
    std::vector<int> cur = op.dims;
    for (size_t a = 0; a < term.factors.size(); ++a) {
      t = apply_axis(term.factors[a], t, cur, static_cast<int>(a));
      cur[a] = static_cast<int>(term.factors[a].rows());
    }
    y += term.coeff * t;
  }
  return y;
}

Eigen::MatrixXd dense_kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

Eigen::SparseMatrix<double> sparse_kron(const Eigen::SparseMatrix<double>& A,
                                        const Eigen::SparseMatrix<double>& B) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(A.nonZeros()) * B.nonZeros());
  for (int ka = 0; ka < A.outerSize(); ++ka)
    for (Eigen::SparseMatrix<double>::InnerIterator ia(A, ka); ia; ++ia)
      for (int kb = 0; kb < B.outerSize(); ++kb)
        for (Eigen::SparseMatrix<double>::InnerIterator ib(B, kb); ib; ++ib)
          trips.emplace_back(ia.row() * B.rows() + ib.row(),
                             ia.col() * B.cols() + ib.col(),
                             ia.value() * ib.value());
  Eigen::SparseMatrix<double> K(A.rows() * B.rows(), A.cols() * B.cols());
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

Eigen::MatrixXd kron_materialize(const KronOperator& op) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(op.rows(), op.cols());
  for (const auto& term : op.terms) {
    Eigen::MatrixXd K = term.factors.back();
    for (int a = static_cast<int>(term.factors.size()) - 2; a >= 0; --a)
      K = dense_kron(K, term.factors[a]);
    out += term.coeff * K;
  }
  return out;
}

}  // namespace fdmstar
