#include "fdmstar/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace fdmstar {

std::pair<double, double> legendre_value_deriv(int k, double x) {
  double pm1 = 1.0, dm1 = 0.0;  // P_0, P'_0
  if (k == 0) return {pm1, dm1};
  double p = x, d = 1.0;  // P_1, P'_1
  for (int n = 1; n < k; ++n) {
    const double pn1 = ((2 * n + 1) * x * p - n * pm1) / (n + 1);
    const double dn1 = dm1 + (2 * n + 1) * p;
    pm1 = p;
    dm1 = d;
    p = pn1;
    d = dn1;
  }
  return {p, d};
}

namespace {

// Enforce exact symmetry about 0; Newton results from symmetric initial
// guesses agree to roundoff, and downstream code relies on node coincidence
// (e.g. the shared midpoint of odd-sized GLL and GL sets) being exact.
void symmetrize(Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n / 2; ++i) {
    const double v = 0.5 * (x[n - 1 - i] - x[i]);
    x[i] = -v;
    x[n - 1 - i] = v;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

}  // namespace

Eigen::VectorXd gll_nodes(int p) {
  if (p < 1) throw std::invalid_argument("gll_nodes: degree must be >= 1");
  Eigen::VectorXd x(p + 1);
  x[0] = -1.0;
  x[p] = 1.0;
  // Interior nodes are the roots of P'_p. Newton on P'_p with
  // P''_p = (2x P'_p - p(p+1) P_p) / (1 - x^2), Chebyshev-Lobatto guesses.
  for (int k = 1; k < p; ++k) {
    double xk = -std::cos(M_PI * k / p);
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      const auto [v, d] = legendre_value_deriv(p, xk);
      const double dd = (2.0 * xk * d - p * (p + 1.0) * v) / (1.0 - xk * xk);
      const double dx = d / dd;
      xk -= dx;
      if (std::abs(d) < 1e-14 || std::abs(dx) < 1e-15) {
        converged = true;
        break;
      }
    }
    if (!converged) throw std::runtime_error("gll_nodes: Newton did not converge");
    x[k] = xk;
  }
  symmetrize(x);
  return x;
}

QuadratureRule gauss_legendre_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_rule: need n >= 1");
  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = -std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [v, d] = legendre_value_deriv(n, x);
      const double dx = v / d;
      x -= dx;
      if (std::abs(v) < 1e-15 || std::abs(dx) < 1e-15) break;
    }
    rule.points[i] = x;
  }
  symmetrize(rule.points);
  for (int i = 0; i < n; ++i) {
    const auto [v, d] = legendre_value_deriv(n, rule.points[i]);
    (void)v;
    const double x = rule.points[i];
    rule.weights[i] = 2.0 / ((1.0 - x * x) * d * d);
  }
  // Symmetrize weights as well.
  for (int i = 0; i < n / 2; ++i) {
    const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace fdmstar
