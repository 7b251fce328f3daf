#include "fdmstar/fdm_basis.hpp"

#include <stdexcept>
#include <vector>

#include "fdmstar/dense_eig.hpp"

namespace fdmstar {

FdmBasis fdm_basis(const ReferenceInterval& ref) {
  if (ref.kind != BasisKind::GllNodal)
    throw std::invalid_argument("fdm_basis: expects the GLL-nodal reference");
  const int p = ref.degree;
  const int ni = p - 1;

  FdmBasis fdm;
  fdm.degree = p;
  fdm.S = Eigen::MatrixXd::Identity(p + 1, p + 1);
  fdm.lambda.resize(ni);

  const Eigen::MatrixXd& A = ref.stiffness;
  const Eigen::MatrixXd& B = ref.mass;
  const Eigen::MatrixXd A_II = A.block(1, 1, ni, ni);
  const Eigen::MatrixXd B_II = B.block(1, 1, ni, ni);
  Eigen::MatrixXd A_IG(ni, 2), B_IG(ni, 2);
  A_IG.col(0) = A.block(1, 0, ni, 1);
  A_IG.col(1) = A.block(1, p, ni, 1);
  B_IG.col(0) = B.block(1, 0, ni, 1);
  B_IG.col(1) = B.block(1, p, ni, 1);
  Eigen::MatrixXd A_GG(2, 2), B_GG(2, 2);
  A_GG << A(0, 0), A(0, p), A(p, 0), A(p, p);
  B_GG << B(0, 0), B(0, p), B(p, 0), B(p, p);

  Eigen::MatrixXd S_II(ni, ni), S_IG(ni, 2);
  if (ni > 0) {
    auto [lambda, V] = dense_sym_gen_eig(A_II, B_II);
    fdm.lambda = lambda;
    S_II = V;
    S_IG = -S_II * (S_II.transpose() * B_IG);
    fdm.S.block(1, 1, ni, ni) = S_II;
    fdm.S.block(1, 0, ni, 1) = S_IG.col(0);
    fdm.S.block(1, p, ni, 1) = S_IG.col(1);
  }

  // Transformed blocks that are not structurally fixed.
  Eigen::MatrixXd At_IG(ni, 2), At_GG(2, 2), Bt_GG(2, 2);
  if (ni > 0) {
    At_IG = S_II.transpose() * (A_II * S_IG + A_IG);
    At_GG = S_IG.transpose() * A_II * S_IG + S_IG.transpose() * A_IG +
            A_IG.transpose() * S_IG + A_GG;
    const Eigen::MatrixXd M = S_II.transpose() * B_IG;
    Bt_GG = B_GG - M.transpose() * M;
  } else {
    At_GG = A_GG;
    Bt_GG = B_GG;
  }

  std::vector<Eigen::Triplet<double>> ta, tb;
  const int slot[2] = {0, p};
  for (int i = 0; i < ni; ++i) {
    ta.emplace_back(1 + i, 1 + i, fdm.lambda[i]);
    tb.emplace_back(1 + i, 1 + i, 1.0);
    for (int g = 0; g < 2; ++g) {
      ta.emplace_back(1 + i, slot[g], At_IG(i, g));
      ta.emplace_back(slot[g], 1 + i, At_IG(i, g));
    }
  }
  for (int g = 0; g < 2; ++g)
    for (int h = 0; h < 2; ++h) {
      ta.emplace_back(slot[g], slot[h], At_GG(g, h));
      tb.emplace_back(slot[g], slot[h], Bt_GG(g, h));
    }
  fdm.A_t.resize(p + 1, p + 1);
  fdm.B_t.resize(p + 1, p + 1);
  fdm.A_t.setFromTriplets(ta.begin(), ta.end());
  fdm.B_t.setFromTriplets(tb.begin(), tb.end());

  fdm.deriv_traces = ref.trace_normal_derivs * fdm.S;
  // Interior eigenmodes have definite parity on the symmetric node set.
  fdm.parity = Eigen::VectorXd::Ones(p + 1);
  for (int j = 1; j < p; ++j) {
    double dot = 0.0;
    for (int i = 0; i <= p; ++i) dot += fdm.S(i, j) * fdm.S(p - i, j);
    fdm.parity[j] = (dot >= 0.0) ? 1.0 : -1.0;
  }
  return fdm;
}

Eigen::MatrixXd interpolate_to_gl(const FdmBasis& fdm, const ReferenceInterval& ref) {
  if (ref.degree != fdm.degree)
    throw std::invalid_argument("interpolate_to_gl: degree mismatch");
  const QuadratureRule gl = gauss_legendre_rule(fdm.degree + 1);
  return ref.eval_values(gl.points) * fdm.S;
}

FdmBasis to_gl_representation(const FdmBasis& fdm, const ReferenceInterval& ref) {
  FdmBasis out = fdm;
  out.S = interpolate_to_gl(fdm, ref);
  return out;
}

}  // namespace fdmstar
