#pragma once

#include <Eigen/Dense>

#include "fdmstar/quadrature.hpp"

namespace fdmstar {

enum class BasisKind { GllNodal, LobattoHierarchical, GlNodal };

// All one-dimensional reference objects for a single polynomial degree:
// stiffness/mass matrices integrated exactly, endpoint traces, and basis
// evaluation at arbitrary points. Row 0 of the trace tables is x = -1,
// row 1 is x = +1; trace_normal_derivs holds the outward derivative
// (-d/dx at -1, +d/dx at +1).
struct ReferenceInterval {
  int degree = 0;
  BasisKind kind = BasisKind::GllNodal;
  Eigen::VectorXd nodes;  // collocation nodes (GLL/GL); GLL for hierarchical too
  Eigen::MatrixXd stiffness;           // (p+1)^2, SPSD
  Eigen::MatrixXd mass;                // (p+1)^2, SPD
  Eigen::MatrixXd trace_values;        // 2 x (p+1)
  Eigen::MatrixXd trace_normal_derivs; // 2 x (p+1)

  // Basis values / derivatives at arbitrary points; row = point, col = function.
  Eigen::MatrixXd eval_values(const Eigen::VectorXd& pts) const;
  Eigen::MatrixXd eval_derivs(const Eigen::VectorXd& pts) const;
};

ReferenceInterval reference_operators(int p, BasisKind kind);

// Lagrange basis on the given nodes evaluated at pts (values and first
// derivatives), via the barycentric formula; exact deltas at coincident points.
void lagrange_eval(const Eigen::VectorXd& nodes, const Eigen::VectorXd& pts,
                   Eigen::MatrixXd& values, Eigen::MatrixXd& derivs);

}  // namespace fdmstar
