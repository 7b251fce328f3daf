#include "fdmstar/schwarz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <atomic>
#include <thread>

namespace fdmstar {

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  const int nt = std::min(threads, n);
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

std::vector<char> boundary_vertices(const Mesh& mesh) {
  std::vector<char> onb(mesh.num_vertices(), 0);
  for (const auto& f : mesh.facets)
    if (f.ncells() == 1)
      for (int v : f.vertices) onb[v] = 1;
  return onb;
}

}  // namespace

Eigen::VectorXd PatchSolver::apply(const Eigen::VectorXd& r) const {
  std::vector<Eigen::VectorXd> corrections(patches.size());
  parallel_for(static_cast<int>(patches.size()), threads, [&](int j) {
    const Patch& patch = patches[j];
    Eigen::VectorXd rj(patch.dofs.size());
    for (size_t i = 0; i < patch.dofs.size(); ++i) rj[i] = r[patch.dofs[i]];
    corrections[j] = patch.factor.solve(rj);
  });
  Eigen::VectorXd z = Eigen::VectorXd::Zero(ndof);
  for (size_t j = 0; j < patches.size(); ++j)
    for (size_t i = 0; i < patches[j].dofs.size(); ++i)
      z[patches[j].dofs[i]] += corrections[j][i];
  return z;
}

std::int64_t PatchSolver::factor_nnz() const {
  std::int64_t n = 0;
  for (const auto& p : patches) n += p.factor.nnz();
  return n;
}

PatchSolver build_patch_solver(const Discretization& disc, const SpMat& At,
                               const SolverConfig& config) {
  const Mesh& mesh = *disc.mesh;
  PatchSolver solver;
  solver.ndof = disc.ndof;
  solver.threads = config.threads;
  const std::vector<char> onb = boundary_vertices(mesh);

  std::vector<std::pair<int, std::vector<int>>> jobs;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (config.skip_boundary_patches && onb[v]) continue;
    std::vector<int> dofs = disc.star_dofs(v);
    if (dofs.empty()) continue;
    jobs.emplace_back(v, std::move(dofs));
  }
  if (jobs.empty())  // tiny meshes may have no interior vertex
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      std::vector<int> dofs = disc.star_dofs(v);
      if (!dofs.empty()) jobs.emplace_back(v, std::move(dofs));
    }

  solver.patches.resize(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), config.threads, [&](int j) {
    auto& [v, dofs] = jobs[j];
    std::vector<DofLabel> labels;
    labels.reserve(dofs.size());
    for (int d : dofs) labels.push_back(disc.labels[d]);
    const Ordering ord = patch_ordering(labels);
    solver.patches[j].vertex = v;
    solver.patches[j].factor = cholesky(extract_submatrix(At, dofs), ord);
    solver.patches[j].dofs = std::move(dofs);
  });
  return solver;
}

DampingEstimate estimate_damping(const LinOp& P_smooth, const LinOp& A, int n,
                                 const SolverConfig& config, const Discretization* disc) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd b(n);
  for (auto& c : b) c = uni(rng);
  if (disc) disc->project_free(b);

  DampingEstimate est;
  try {
    auto [x, rep] = pcg(A, P_smooth, b, 1e-12, config.lanczos_steps);
    (void)x;
    if (rep.lambda_min <= 0.0 || rep.lambda_max <= 0.0) return est;  // omega = 1
    est.lambda_min = rep.lambda_min;
    est.lambda_max = rep.lambda_max;
    est.omega = (config.damping_formula == DampingFormula::Paper)
                    ? 0.5 * (rep.lambda_max + rep.lambda_min)
                    : 2.0 / (rep.lambda_max + rep.lambda_min);
  } catch (const std::exception&) {
    // Breakdown in the probe: keep omega = 1.
  }
  return est;
}

Eigen::VectorXd TwoLevel::smooth(const Eigen::VectorXd& r) const {
  return sys->apply_S(patches.apply(sys->apply_St(r)));
}

Eigen::VectorXd TwoLevel::apply(const Eigen::VectorXd& r) const {
  Eigen::VectorXd z = omega * smooth(r);
  Eigen::VectorXd r1 = r - A(z);
  Eigen::VectorXd rc = prolong.transpose() * r1;
  z += prolong * coarse->solve(rc);
  Eigen::VectorXd r2 = r - A(z);
  z += omega * smooth(r2);
  return z;
}

LinOp TwoLevel::applier() const {
  return [this](const Eigen::VectorXd& r) { return apply(r); };
}

SpMat build_prolongation(const Discretization& fine, const Discretization& coarse,
                         const std::vector<std::array<Eigen::MatrixXd, 3>>& phat) {
  if (fine.num_components() != coarse.num_components())
    throw std::invalid_argument("build_prolongation: component mismatch");
  const Mesh& mesh = *fine.mesh;
  std::vector<Eigen::Triplet<double>> trips;
  for (int ci = 0; ci < fine.num_components(); ++ci) {
    Eigen::MatrixXd cellP = phat[ci][mesh.dim - 1];
    for (int a = mesh.dim - 2; a >= 0; --a) cellP = dense_kron(cellP, phat[ci][a]).eval();
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto& fd = fine.comps[ci].cell_dofs[c];
      const auto& cd = coarse.comps[ci].cell_dofs[c];
      for (int i = 0; i < cellP.rows(); ++i) {
        if (fine.constrained[fd[i]]) continue;
        for (int j = 0; j < cellP.cols(); ++j)
          if (!coarse.constrained[cd[j]] && cellP(i, j) != 0.0)
            trips.emplace_back(fd[i], cd[j], cellP(i, j));
      }
    }
  }
  SpMat P(fine.ndof, coarse.ndof);
  P.setFromTriplets(trips.begin(), trips.end());
  for (int i = 0; i < P.outerSize(); ++i)
    for (SpMat::InnerIterator it(P, i); it; ++it)
      it.valueRef() /= fine.multiplicity[i];
  return P;
}

void calibrate_damping(TwoLevel& tl, const Discretization& disc,
                       const SolverConfig& config) {
  if (!config.damping_auto) {
    tl.omega = config.damping_value;
    return;
  }
  LinOp smooth = [&tl](const Eigen::VectorXd& r) { return tl.smooth(r); };
  DampingEstimate est = estimate_damping(smooth, tl.A, disc.ndof, config, &disc);
  tl.lambda_min = est.lambda_min;
  tl.lambda_max = est.lambda_max;
  if (est.lambda_max <= 0.0) {
    tl.omega = 1.0;
    return;
  }
  if (config.damping_formula != DampingFormula::TwoGrid) {
    tl.omega = est.omega;
    return;
  }
  // Trial cycle at a safe damping; its smallest preconditioned eigenvalue
  // 1 - (1 - omega0 mu)^2 identifies mu_c on the coarse complement.
  const double omega0 = 1.0 / est.lambda_max;
  tl.omega = omega0;
  std::mt19937_64 rng(config.seed + 1);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd b(disc.ndof);
  for (auto& v : b) v = uni(rng);
  disc.project_free(b);
  auto cycle_kappa = [&](double omega) {
    tl.omega = omega;
    try {
      auto [x, rep] = pcg(tl.A, tl.applier(), b, 1e-12, config.lanczos_steps);
      (void)x;
      if (rep.lambda_min <= 0.0) return std::numeric_limits<double>::infinity();
      return rep.lambda_max / rep.lambda_min;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double mu_c = est.lambda_min;
  try {
    auto [x, rep] = pcg(tl.A, tl.applier(), b, 1e-12, config.lanczos_steps);
    (void)x;
    if (rep.lambda_min > 0.0 && rep.lambda_min < 1.0)
      mu_c = (1.0 - std::sqrt(1.0 - rep.lambda_min)) / omega0;
  } catch (const std::exception&) {
  }
  mu_c = std::min(std::max(mu_c, est.lambda_min), est.lambda_max);
  // The two-grid formula is exact for commuting smoother and coarse
  // projector; sweep a few candidates around it and keep the best probe.
  double best_omega = 2.0 / (mu_c + est.lambda_max);
  double best_kappa = cycle_kappa(best_omega);
  for (double factor : {0.8, 1.2, 1.4}) {
    const double omega = factor * omega0;
    if (omega >= 2.0 * omega0 || std::abs(omega - best_omega) < 1e-3) continue;
    const double kappa = cycle_kappa(omega);
    if (kappa < best_kappa) {
      best_kappa = kappa;
      best_omega = omega;
    }
  }
  tl.omega = best_omega;
}

TwoLevel build_poisson_twolevel(const Discretization& disc, const Bundle1D& bundle,
                                std::shared_ptr<const GlobalOperator> A,
                                const SolverConfig& config) {
  TwoLevel tl;
  tl.A = [A](const Eigen::VectorXd& x) { return A->apply(x); };
  auto sys = std::make_shared<TransformedSystem>(transformed_poisson(disc, bundle));
  tl.sys = sys;
  tl.patches = build_patch_solver(disc, sys->At, config);

  Discretization coarse_disc = q_space(*disc.mesh, config.coarse_degree);
  Bundle1D coarse_bundle = make_bundle(Family1D::CG, config.coarse_degree);
  GlobalOperator coarse_op = poisson_operator(coarse_disc, coarse_bundle);
  tl.coarse = std::make_shared<CholFactor>(
      cholesky(coarse_op.assemble(), natural_ordering(coarse_disc.ndof)));

  std::vector<std::array<Eigen::MatrixXd, 3>> phat(1);
  for (int a = 0; a < disc.dim(); ++a)
    phat[0][a] = coarse_bundle.ref.eval_values(bundle.ref.nodes);
  tl.prolong = build_prolongation(disc, coarse_disc, phat);

  calibrate_damping(tl, disc, config);
  return tl;
}

}  // namespace fdmstar
