#include "fdmstar/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace fdmstar {

namespace {

double corner_shape(int corner, int axis, const Eigen::VectorXd& xhat, int dim,
                    bool derivative_axis) {
  double g = 1.0;
  for (int a = 0; a < dim; ++a) {
    const bool hi = (corner >> a) & 1;
    if (derivative_axis && a == axis)
      g *= hi ? 0.5 : -0.5;
    else
      g *= hi ? 0.5 * (1.0 + xhat[a]) : 0.5 * (1.0 - xhat[a]);
  }
  return g;
}

}  // namespace

Eigen::Vector3d cell_map(const Mesh& mesh, int cell, const Eigen::VectorXd& xhat) {
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  for (int b = 0; b < mesh.corners_per_cell(); ++b)
    x += corner_shape(b, -1, xhat, mesh.dim, false) * mesh.vertices[mesh.cells[cell][b]];
  return x;
}

Eigen::MatrixXd cell_map_jacobian(const Mesh& mesh, int cell, const Eigen::VectorXd& xhat) {
  const int d = mesh.dim;
  Eigen::MatrixXd DF = Eigen::MatrixXd::Zero(d, d);
  for (int b = 0; b < mesh.corners_per_cell(); ++b) {
    const Eigen::Vector3d& v = mesh.vertices[mesh.cells[cell][b]];
    for (int a = 0; a < d; ++a) {
      const double g = corner_shape(b, a, xhat, d, true);
      for (int r = 0; r < d; ++r) DF(r, a) += g * v[r];
    }
  }
  return DF;
}

CellGeometry cell_geometry(const Mesh& mesh, int cell, const QuadratureRule& rule) {
  const int d = mesh.dim;
  const int nq1 = rule.size();
  int nq = 1;
  for (int a = 0; a < d; ++a) nq *= nq1;

  CellGeometry geom;
  geom.cell = cell;
  geom.jacobians.reserve(nq);
  geom.metric.reserve(nq);
  geom.dets.resize(nq);
  geom.quad_weights.resize(nq);

  Eigen::VectorXd xhat(d);
  for (int q = 0; q < nq; ++q) {
    int qq = q;
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      xhat[a] = rule.points[qq % nq1];
      w *= rule.weights[qq % nq1];
      qq /= nq1;
    }
    Eigen::MatrixXd DF = cell_map_jacobian(mesh, cell, xhat);
    const double det = DF.determinant();
    if (det <= 0)
      throw std::runtime_error("cell_geometry: non-positive Jacobian in cell " +
                               std::to_string(cell));
    Eigen::MatrixXd inv = DF.inverse();
    geom.metric.push_back(det * inv * inv.transpose());
    geom.jacobians.push_back(std::move(DF));
    geom.dets[q] = det;
    geom.quad_weights[q] = w;
  }

  const Eigen::MatrixXd& J0 = geom.jacobians[0];
  const double scale = J0.cwiseAbs().maxCoeff();
  bool constant = true, diagonal = true;
  for (const auto& J : geom.jacobians)
    if ((J - J0).cwiseAbs().maxCoeff() > 1e-13 * scale) constant = false;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      if (r != c && std::abs(J0(r, c)) > 1e-13 * scale) diagonal = false;
  geom.kind = (constant && diagonal) ? MapKind::Cartesian
            : constant               ? MapKind::Affine
                                     : MapKind::Bilinear;

  if (geom.kind == MapKind::Cartesian) {
    geom.lengths = J0.diagonal();
    geom.mu.resize(d);
    double prod = 1.0;
    for (int a = 0; a < d; ++a) prod *= geom.lengths[a];
    for (int a = 0; a < d; ++a) geom.mu[a] = prod / (geom.lengths[a] * geom.lengths[a]);
  } else {
    const double ref_measure = std::pow(2.0, d);
    geom.mu = Eigen::VectorXd::Zero(d);
    for (int q = 0; q < nq; ++q)
      geom.mu += geom.quad_weights[q] / ref_measure * geom.metric[q].diagonal();
  }
  return geom;
}

Eigen::VectorXd surrogate_coeffs(const CellGeometry& geom) { return geom.mu; }

double cell_measure(const Mesh& mesh, int cell) {
  const QuadratureRule rule = gauss_legendre_rule(3);
  CellGeometry geom = cell_geometry(mesh, cell, rule);
  return geom.quad_weights.dot(geom.dets);
}

double facet_measure(const Mesh& mesh, int facet) {
  const Facet& f = mesh.facets[facet];
  const int d = mesh.dim;
  const int cell = f.cell[0];
  const int axis = f.axis[0];
  const QuadratureRule rule = gauss_legendre_rule(3);
  double measure = 0.0;
  Eigen::VectorXd xhat(d);
  xhat[axis] = static_cast<double>(f.side[0]);
  if (d == 2) {
    const int t = 1 - axis;
    for (int q = 0; q < rule.size(); ++q) {
      xhat[t] = rule.points[q];
      Eigen::MatrixXd DF = cell_map_jacobian(mesh, cell, xhat);
      measure += rule.weights[q] * DF.col(t).norm();
    }
  } else {
    int t0 = -1, t1 = -1;
    for (int a = 0; a < 3; ++a)
      if (a != axis) (t0 < 0 ? t0 : t1) = a;
    for (int q0 = 0; q0 < rule.size(); ++q0)
      for (int q1 = 0; q1 < rule.size(); ++q1) {
        xhat[t0] = rule.points[q0];
        xhat[t1] = rule.points[q1];
        Eigen::MatrixXd DF = cell_map_jacobian(mesh, cell, xhat);
        Eigen::Vector3d a = Eigen::Vector3d::Zero(), b = Eigen::Vector3d::Zero();
        a.head(3) = DF.col(t0);
        b.head(3) = DF.col(t1);
        measure += rule.weights[q0] * rule.weights[q1] * a.cross(b).norm();
      }
  }
  return measure;
}

double reciprocal_facet_length(const Mesh& mesh, int facet) {
  const Facet& f = mesh.facets[facet];
  const double e = facet_measure(mesh, facet);
  if (f.ncells() == 1) return e / cell_measure(mesh, f.cell[0]);
  return 0.5 * (e / cell_measure(mesh, f.cell[0]) + e / cell_measure(mesh, f.cell[1]));
}

}  // namespace fdmstar
