#include "fdmstar/sparse.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

namespace fdmstar {

Eigen::VectorXd spmv(const SpMat& A, const Eigen::VectorXd& x) {
  if (A.cols() != x.size()) throw std::invalid_argument("spmv: dimension mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(A.rows());
  for (int i = 0; i < A.outerSize(); ++i) {
    double acc = 0.0;
    for (SpMat::InnerIterator it(A, i); it; ++it) acc += it.value() * x[it.col()];
    y[i] = acc;
  }
  return y;
}

SpMat extract_submatrix(const SpMat& A, const std::vector<int>& dofs) {
  std::vector<int> where(A.rows(), -1);
  for (size_t k = 0; k < dofs.size(); ++k) where[dofs[k]] = static_cast<int>(k);
  std::vector<Eigen::Triplet<double>> trips;
  for (size_t k = 0; k < dofs.size(); ++k)
    for (SpMat::InnerIterator it(A, dofs[k]); it; ++it)
      if (where[it.col()] >= 0)
        trips.emplace_back(static_cast<int>(k), where[it.col()], it.value());
  SpMat S(dofs.size(), dofs.size());
  S.setFromTriplets(trips.begin(), trips.end());
  return S;
}

void write_matrix_market(std::ostream& os, const SpMat& A, bool symmetric) {
  os << "%%MatrixMarket matrix coordinate real "
     << (symmetric ? "symmetric" : "general") << "\n";
  Eigen::Index nnz = 0;
  for (int i = 0; i < A.outerSize(); ++i)
    for (SpMat::InnerIterator it(A, i); it; ++it)
      if (!symmetric || it.col() <= it.row()) ++nnz;
  os << A.rows() << " " << A.cols() << " " << nnz << "\n";
  os.precision(17);
  for (int i = 0; i < A.outerSize(); ++i)
    for (SpMat::InnerIterator it(A, i); it; ++it)
      if (!symmetric || it.col() <= it.row())
        os << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

void write_matrix_market(const std::string& path, const SpMat& A, bool symmetric) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_matrix_market(os, A, symmetric);
}

}  // namespace fdmstar
