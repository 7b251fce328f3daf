#include "fdmstar/krylov.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fdmstar {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::pair<double, double> tridiag_extremes(const std::vector<double>& diag,
                                           const std::vector<double>& off) {
  const int n = static_cast<int>(diag.size());
  if (n == 0) return {0.0, 0.0};
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) T(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) T(i, i + 1) = T(i + 1, i) = off[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  return {es.eigenvalues()[0], es.eigenvalues()[n - 1]};
}

std::pair<Eigen::VectorXd, KrylovReport> pcg(const LinOp& A, const LinOp& Pinv,
                                             const Eigen::VectorXd& b, double rtol,
                                             int maxit) {
  const auto t0 = std::chrono::steady_clock::now();
  KrylovReport rep;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.kappa = 1.0;
    rep.wall_time = seconds_since(t0);
    return {x, rep};
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = Pinv(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  std::vector<double> alphas, betas;
  for (int k = 0; k < maxit; ++k) {
    Eigen::VectorXd Ap = A(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0))
      throw std::runtime_error("pcg: indefinite operator at iteration " + std::to_string(k + 1));
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    alphas.push_back(alpha);
    rep.residuals.push_back(r.norm() / bnorm);
    rep.iterations = k + 1;
    if (rep.residuals.back() <= rtol) {
      rep.converged = true;
      break;
    }
    z = Pinv(r);
    const double rz_new = r.dot(z);
    const double beta = rz_new / rz;
    betas.push_back(beta);
    rz = rz_new;
    p = z + beta * p;
  }
  // Lanczos tridiagonal from the CG coefficients.
  std::vector<double> tdiag, toff;
  for (size_t k = 0; k < alphas.size(); ++k) {
    double dk = 1.0 / alphas[k];
    if (k > 0) dk += betas[k - 1] / alphas[k - 1];
    tdiag.push_back(dk);
    if (k + 1 < alphas.size()) toff.push_back(std::sqrt(betas[k]) / alphas[k]);
  }
  auto [lmin, lmax] = tridiag_extremes(tdiag, toff);
  rep.lambda_min = lmin;
  rep.lambda_max = lmax;
  rep.kappa = (lmin > 0) ? lmax / lmin : 0.0;
  rep.wall_time = seconds_since(t0);
  return {x, rep};
}

std::pair<Eigen::VectorXd, KrylovReport> minres(const LinOp& A, const LinOp& Pinv,
                                                const Eigen::VectorXd& b, double rtol,
                                                int maxit) {
  const auto t0 = std::chrono::steady_clock::now();
  KrylovReport rep;
  const Eigen::Index n = b.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.wall_time = seconds_since(t0);
    return {x, rep};
  }

  Eigen::VectorXd r1 = b;
  Eigen::VectorXd y = Pinv(b);
  double beta1 = r1.dot(y);
  if (beta1 < 0.0) throw std::runtime_error("minres: preconditioner is not SPD");
  beta1 = std::sqrt(beta1);
  if (beta1 == 0.0) {
    rep.converged = true;
    rep.wall_time = seconds_since(t0);
    return {x, rep};
  }

  Eigen::VectorXd r2 = r1;
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w2 = Eigen::VectorXd::Zero(n);

  for (int it = 1; it <= maxit; ++it) {
    Eigen::VectorXd v = y / beta;
    y = A(v);
    if (it >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = Pinv(r2);
    oldb = beta;
    beta = r2.dot(y);
    if (beta < 0.0) {
      // Distinguish a genuinely indefinite preconditioner from roundoff at
      // the recurrence floor.
      if (beta < -1e-13 * r2.norm() * y.norm())
        throw std::runtime_error("minres: preconditioner is not SPD");
      rep.residuals.push_back((b - A(x)).norm() / bnorm);
      rep.converged = rep.residuals.back() <= rtol;
      break;
    }
    beta = std::sqrt(beta);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::sqrt(gbar * gbar + beta * beta);
    gamma = std::max(gamma, 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    Eigen::VectorXd w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;

    rep.iterations = it;
    rep.residuals.push_back((b - A(x)).norm() / bnorm);
    if (rep.residuals.back() <= rtol) {
      rep.converged = true;
      break;
    }
  }
  rep.wall_time = seconds_since(t0);
  return {x, rep};
}

std::pair<Eigen::VectorXd, KrylovReport> gmres_restarted(const LinOp& A, const LinOp& Pinv,
                                                         const Eigen::VectorXd& b,
                                                         int restart, double rtol,
                                                         int maxit) {
  const auto t0 = std::chrono::steady_clock::now();
  KrylovReport rep;
  const Eigen::Index n = b.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.wall_time = seconds_since(t0);
    return {x, rep};
  }

  const int m = restart;
  std::vector<Eigen::VectorXd> V(m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  std::vector<double> c(m), s(m);
  Eigen::VectorXd g(m + 1);
  double last_cycle_res = std::numeric_limits<double>::infinity();

  while (rep.iterations < maxit) {
    Eigen::VectorXd r = b - A(x);
    double beta = r.norm();
    if (beta / bnorm <= rtol) {
      rep.converged = true;
      break;
    }
    if (beta >= last_cycle_res * (1.0 - 1e-14)) break;  // stagnated across a cycle
    last_cycle_res = beta;
    V[0] = r / beta;
    g.setZero();
    g[0] = beta;
    int j = 0;
    bool happy = false;
    for (; j < m && rep.iterations < maxit; ++j) {
      Eigen::VectorXd wv = A(Pinv(V[j]));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = wv.dot(V[i]);
        wv -= H(i, j) * V[i];
      }
      const double wnorm = wv.norm();
      H(j + 1, j) = wnorm;
      if (wnorm > 1e-300) V[j + 1] = wv / wnorm;
      for (int i = 0; i < j; ++i) {
        const double t = c[i] * H(i, j) + s[i] * H(i + 1, j);
        H(i + 1, j) = -s[i] * H(i, j) + c[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::sqrt(H(j, j) * H(j, j) + H(j + 1, j) * H(j + 1, j));
      c[j] = H(j, j) / denom;
      s[j] = H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g[j + 1] = -s[j] * g[j];
      g[j] *= c[j];
      ++rep.iterations;
      rep.residuals.push_back(std::abs(g[j + 1]) / bnorm);
      if (rep.residuals.back() <= rtol || wnorm <= 1e-300) {
        happy = true;
        ++j;
        break;
      }
    }
    // y = H(0:j-1,0:j-1)^{-1} g(0:j-1), x += Pinv(V y)
    Eigen::VectorXd yk =
        H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < j; ++i) z += yk[i] * V[i];
    x += Pinv(z);
    if (happy && rep.residuals.back() <= rtol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.residuals.empty() && rep.residuals.back() <= rtol) rep.converged = true;
  rep.wall_time = seconds_since(t0);
  return {x, rep};
}

}  // namespace fdmstar
