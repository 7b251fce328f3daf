#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fdmstar/mesh.hpp"
#include "fdmstar/quadrature.hpp"

namespace fdmstar {

enum class MapKind { Cartesian, Affine, Bilinear };

// Map data of one cell at the tensor quadrature points. metric holds
// G = |det DF| DF^{-1} DF^{-T}; mu its cell-averaged diagonal. For Cartesian
// cells lengths[j] is the half-extent along axis j (reference interval
// convention), and mu is the exact closed form lengths[j]^{-2} * prod(lengths).
struct CellGeometry {
  int cell = -1;
  MapKind kind = MapKind::Bilinear;
  std::vector<Eigen::MatrixXd> jacobians;
  Eigen::VectorXd dets;  // |det DF| per point
  std::vector<Eigen::MatrixXd> metric;
  Eigen::VectorXd quad_weights;  // tensor product weights
  Eigen::VectorXd mu;
  Eigen::VectorXd lengths;  // Cartesian only
};

// Physical point and Jacobian of the multilinear cell map at xhat.
Eigen::Vector3d cell_map(const Mesh& mesh, int cell, const Eigen::VectorXd& xhat);
Eigen::MatrixXd cell_map_jacobian(const Mesh& mesh, int cell, const Eigen::VectorXd& xhat);

CellGeometry cell_geometry(const Mesh& mesh, int cell, const QuadratureRule& rule);

Eigen::VectorXd surrogate_coeffs(const CellGeometry& geom);

double cell_measure(const Mesh& mesh, int cell);
double facet_measure(const Mesh& mesh, int facet);

// h_e^{-1} = (|e|/|K-| + |e|/|K+|) / 2 on interior facets, |e|/|K| on
// boundary facets (physical measures).
double reciprocal_facet_length(const Mesh& mesh, int facet);

}  // namespace fdmstar
