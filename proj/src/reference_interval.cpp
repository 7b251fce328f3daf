#include "fdmstar/reference_interval.hpp"

#include <cmath>
#include <stdexcept>

namespace fdmstar {

void lagrange_eval(const Eigen::VectorXd& nodes, const Eigen::VectorXd& pts,
                   Eigen::MatrixXd& values, Eigen::MatrixXd& derivs) {
  const int n = static_cast<int>(nodes.size());
  const int m = static_cast<int>(pts.size());
  Eigen::VectorXd w(n);  // barycentric weights
  for (int j = 0; j < n; ++j) {
    double prod = 1.0;
    for (int k = 0; k < n; ++k)
      if (k != j) prod *= nodes[j] - nodes[k];
    w[j] = 1.0 / prod;
  }
  values.setZero(m, n);
  derivs.setZero(m, n);
  for (int q = 0; q < m; ++q) {
    const double x = pts[q];
    int hit = -1;
    for (int j = 0; j < n; ++j)
      if (std::abs(x - nodes[j]) < 8e-15) { hit = j; break; }
    if (hit >= 0) {
      values(q, hit) = 1.0;
      double diag = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == hit) continue;
        const double d = (w[j] / w[hit]) / (nodes[hit] - nodes[j]);
        derivs(q, j) = d;
        diag -= d;
      }
      derivs(q, hit) = diag;
      continue;
    }
    double s = 0.0, sp = 0.0;
    for (int j = 0; j < n; ++j) {
      const double g = w[j] / (x - nodes[j]);
      s += g;
      sp -= g / (x - nodes[j]);
    }
    for (int j = 0; j < n; ++j) {
      const double lj = (w[j] / (x - nodes[j])) / s;
      values(q, j) = lj;
      derivs(q, j) = lj * (-1.0 / (x - nodes[j]) - sp / s);
    }
  }
}

namespace {

// Hierarchical Lobatto basis: linear hats at the end slots, integrated
// Legendre bubbles l_j = (P_{j+1} - P_{j-1}) / (2j+1) in slots 1..p-1,
// so that l'_j = P_j and the bubbles vanish at both endpoints.
void lobatto_eval(int p, const Eigen::VectorXd& pts, Eigen::MatrixXd& values,
                  Eigen::MatrixXd& derivs) {
  const int m = static_cast<int>(pts.size());
  values.resize(m, p + 1);
  derivs.resize(m, p + 1);
  for (int q = 0; q < m; ++q) {
    const double x = pts[q];
    values(q, 0) = 0.5 * (1.0 - x);
    derivs(q, 0) = -0.5;
    values(q, p) = 0.5 * (1.0 + x);
    derivs(q, p) = 0.5;
    // P_0..P_{p} at x by recurrence.
    Eigen::VectorXd P(p + 2);
    P[0] = 1.0;
    if (p + 1 >= 1) P[1] = x;
    for (int k = 1; k <= p; ++k) P[k + 1] = ((2 * k + 1) * x * P[k] - k * P[k - 1]) / (k + 1);
    for (int j = 1; j < p; ++j) {
      values(q, j) = (P[j + 1] - P[j - 1]) / (2 * j + 1);
      derivs(q, j) = P[j];
    }
  }
}

}  // namespace

Eigen::MatrixXd ReferenceInterval::eval_values(const Eigen::VectorXd& pts) const {
  Eigen::MatrixXd v, d;
  if (kind == BasisKind::LobattoHierarchical)
    lobatto_eval(degree, pts, v, d);
  else
    lagrange_eval(nodes, pts, v, d);
  return v;
}

Eigen::MatrixXd ReferenceInterval::eval_derivs(const Eigen::VectorXd& pts) const {
  Eigen::MatrixXd v, d;
  if (kind == BasisKind::LobattoHierarchical)
    lobatto_eval(degree, pts, v, d);
  else
    lagrange_eval(nodes, pts, v, d);
  return d;
}

ReferenceInterval reference_operators(int p, BasisKind kind) {
  if (p < 1) throw std::invalid_argument("reference_operators: degree must be >= 1");
  switch (kind) {
    case BasisKind::GllNodal:
    case BasisKind::LobattoHierarchical:
    case BasisKind::GlNodal:
      break;
    default:
      throw std::invalid_argument("reference_operators: unknown basis kind");
  }
  ReferenceInterval ref;
  ref.degree = p;
  ref.kind = kind;
  ref.nodes = (kind == BasisKind::GlNodal) ? gauss_legendre_rule(p + 1).points : gll_nodes(p);

  // Gauss-Legendre with p+1 points integrates the degree <= 2p integrands exactly.
  const QuadratureRule quad = gauss_legendre_rule(p + 1);
  const Eigen::MatrixXd V = ref.eval_values(quad.points);
  const Eigen::MatrixXd D = ref.eval_derivs(quad.points);
  ref.stiffness = D.transpose() * quad.weights.asDiagonal() * D;
  ref.mass = V.transpose() * quad.weights.asDiagonal() * V;
  ref.stiffness = 0.5 * (ref.stiffness + ref.stiffness.transpose()).eval();
  ref.mass = 0.5 * (ref.mass + ref.mass.transpose()).eval();

  Eigen::VectorXd ends(2);
  ends << -1.0, 1.0;
  ref.trace_values = ref.eval_values(ends);
  ref.trace_normal_derivs = ref.eval_derivs(ends);
  ref.trace_normal_derivs.row(0) *= -1.0;  // outward at x = -1
  return ref;
}

}  // namespace fdmstar
