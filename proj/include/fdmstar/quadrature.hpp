#pragma once

#include <Eigen/Dense>
#include <utility>

namespace fdmstar {

struct QuadratureRule {
  Eigen::VectorXd points;   // strictly increasing, in [-1, 1]
  Eigen::VectorXd weights;  // positive, sum to 2
  int size() const { return static_cast<int>(points.size()); }
};

// Legendre polynomial P_k and its derivative at x, by the three-term recurrence.
std::pair<double, double> legendre_value_deriv(int k, double x);

// Gauss-Lobatto-Legendre nodes: the p+1 roots of (1 - x^2) P'_p(x), ascending.
Eigen::VectorXd gll_nodes(int p);

// Gauss-Legendre rule with n points; exact for polynomials of degree <= 2n-1.
QuadratureRule gauss_legendre_rule(int n);

}  // namespace fdmstar
