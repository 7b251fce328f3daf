#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "fdmstar/mixed.hpp"

using namespace fdmstar;

namespace {

Mesh table_mesh(int n) {
  Mesh mesh = cartesian_mesh(2, {n, n}, {1, 1});
  tag_boundary(mesh, [](const Eigen::Vector3d&) { return true; }, FacetTag::Neumann);
  tag_boundary(mesh, [](const Eigen::Vector3d& x) { return std::abs(x[0]) < 1e-12; },
               FacetTag::Dirichlet);
  return mesh;
}

Eigen::VectorXd random_free(const Discretization& disc, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1, 1);
  Eigen::VectorXd x(disc.ndof);
  for (auto& c : x) c = uni(rng);
  disc.project_free(x);
  return x;
}

// Interpolates (fx, fy) onto an RT space: coefficients are reference
// components at the tensor collocation nodes, u_hat_j = L_{1-j} * u_j.
Eigen::VectorXd rt_interpolate(const Discretization& disc, const Bundle1D& nb,
                               const Bundle1D& tb,
                               const std::function<Eigen::Vector2d(double, double)>& u) {
  const Mesh& mesh = *disc.mesh;
  Eigen::VectorXd x(disc.ndof);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    Eigen::VectorXd center = Eigen::VectorXd::Zero(2);
    const Eigen::MatrixXd DF = cell_map_jacobian(mesh, c, center);
    for (int cj = 0; cj < 2; ++cj) {
      const auto& comp = disc.comps[cj];
      const int n0 = comp.degree[0] + 1;
      for (int j = 0; j < comp.dofs_per_cell; ++j) {
        Eigen::VectorXd xhat(2);
        const Eigen::VectorXd& nx = (cj == 0) ? nb.ref.nodes : tb.ref.nodes;
        const Eigen::VectorXd& ny = (cj == 1) ? nb.ref.nodes : tb.ref.nodes;
        xhat << nx[j % n0], ny[j / n0];
        Eigen::Vector3d pt = cell_map(mesh, c, xhat);
        x[comp.cell_dofs[c][j]] = DF(1 - cj, 1 - cj) * u(pt[0], pt[1])[cj];
      }
    }
  }
  return x;
}

}  // namespace

TEST_CASE("rt volume blocks match a Piola quadrature oracle") {
  Mesh mesh = cartesian_mesh(2, {2, 1}, {1.0, 0.6});
  const int p = 3;
  const double mu = 1.3;
  Discretization disc = rt_space(mesh, p);
  Bundle1D nb = make_bundle(Family1D::CG, p);
  Bundle1D tb = make_bundle(Family1D::DG, p - 1);
  GlobalOperator op = rt_operator(disc, nb, tb, mu, sipg_default_eta(p, 2));

  const QuadratureRule rule = gauss_legendre_rule(p + 2);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Eigen::Vector2d L(cell_map_jacobian(mesh, c, Eigen::Vector2d::Zero())(0, 0),
                            cell_map_jacobian(mesh, c, Eigen::Vector2d::Zero())(1, 1));
    const int nloc0 = disc.comps[0].dofs_per_cell;
    const int nloc1 = disc.comps[1].dofs_per_cell;
    const int n = nloc0 + nloc1;
    // Quadrature oracle: physical gradients of the Piola-mapped basis.
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(n, n);
    std::vector<Eigen::Matrix2d> grads(n);  // per quad point below
    for (int q0 = 0; q0 < rule.size(); ++q0)
      for (int q1 = 0; q1 < rule.size(); ++q1) {
        const double w = rule.weights[q0] * rule.weights[q1] * L[0] * L[1];
        std::vector<Eigen::Matrix2d> eps(n, Eigen::Matrix2d::Zero());
        int off = 0;
        for (int cj = 0; cj < 2; ++cj) {
          const auto& comp = disc.comps[cj];
          const int n0 = comp.degree[0] + 1;
          const Bundle1D& bx = (cj == 0) ? nb : tb;
          const Bundle1D& by = (cj == 1) ? nb : tb;
          Eigen::VectorXd px(1), py(1);
          px << rule.points[q0];
          py << rule.points[q1];
          const Eigen::MatrixXd Vx = bx.ref.eval_values(px), Dx = bx.ref.eval_derivs(px);
          const Eigen::MatrixXd Vy = by.ref.eval_values(py), Dy = by.ref.eval_derivs(py);
          const double piola = 1.0 / L[1 - cj];
          for (int j = 0; j < comp.dofs_per_cell; ++j) {
            Eigen::Vector2d g(piola * Dx(0, j % n0) * Vy(0, j / n0) / L[0],
                              piola * Vx(0, j % n0) * Dy(0, j / n0) / L[1]);
            Eigen::Matrix2d du = Eigen::Matrix2d::Zero();
            du.row(cj) = g.transpose();
            eps[off + j] = 0.5 * (du + du.transpose());
          }
          off += comp.dofs_per_cell;
        }
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            oracle(i, j) += w * 2.0 * mu * (eps[i].array() * eps[j].array()).sum();
      }
    Eigen::MatrixXd kron = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [ci, cj, kop] : op.cells[c].kron_blocks)
      kron.block(ci == 0 ? 0 : nloc0, cj == 0 ? 0 : nloc0, ci == 0 ? nloc0 : nloc1,
                 cj == 0 ? nloc0 : nloc1) = kron_materialize(kop);
    CHECK((kron - oracle).cwiseAbs().maxCoeff() < 1e-11 * oracle.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("rt operator: consistency term against analytic fluxes") {
  // u smooth polynomial, exactly representable: facet jumps of u vanish, so
  // v' A u = volume(v,u) - sum over facets of [[v]] : <F(grad u)>.
  Mesh mesh = table_mesh(2);
  const int p = 3;
  const double mu = 0.9;
  Discretization disc = rt_space(mesh, p);
  Bundle1D nb = make_bundle(Family1D::CG, p);
  Bundle1D tb = make_bundle(Family1D::DG, p - 1);
  GlobalOperator op = rt_operator(disc, nb, tb, mu, sipg_default_eta(p, 2));

  // Both components vanish on the Dirichlet plane x = 0, so the boundary
  // penalty and adjoint terms drop and only the consistency term remains.
  auto uf = [](double x, double y) { return Eigen::Vector2d(x * x * y + x, x * y * y - x); };
  auto grad_uf = [](double x, double y) {
    Eigen::Matrix2d g;
    g << 2 * x * y + 1, x * x, y * y - 1, 2 * x * y;
    return g;  // g(i,j) = d u_i / d x_j
  };
  Eigen::VectorXd u = rt_interpolate(disc, nb, tb, uf);
  Eigen::VectorXd v = random_free(disc, 3);
  // Zero the constrained entries of u as the operator does internally.
  disc.project_free(u);

  // Volume part via the validated Kronecker blocks only.
  GlobalOperator vol;
  vol.disc = &disc;
  vol.cells = op.cells;
  double lhs = v.dot(op.apply(u));
  double rhs = v.dot(vol.apply(u));

  // Facet corrections: - [[v]] : <F(grad u)> with the analytic gradient,
  // including the Dirichlet facets (where <.> is the one-sided trace).
  const QuadratureRule rule = gauss_legendre_rule(p + 3);
  for (int fi = 0; fi < static_cast<int>(mesh.facets.size()); ++fi) {
    const Facet& f = mesh.facets[fi];
    if (f.tag == FacetTag::Neumann) continue;
    const int axis = f.axis[0];
    for (int q = 0; q < rule.size(); ++q) {
      // Point on the facet via cell 0.
      Eigen::VectorXd xhat(2);
      xhat[axis] = static_cast<double>(f.side[0]);
      xhat[1 - axis] = rule.points[q];
      const Eigen::MatrixXd DF = cell_map_jacobian(mesh, f.cell[0], xhat);
      const double arc = DF.col(1 - axis).norm();
      Eigen::Vector3d pt = cell_map(mesh, f.cell[0], xhat);
      Eigen::Vector2d n = Eigen::Vector2d::Zero();
      n[axis] = static_cast<double>(f.side[0]);
      const Eigen::Matrix2d g = grad_uf(pt[0], pt[1]);
      const Eigen::Vector2d flux = mu * (g + g.transpose()) * n;
      // [[v]] against the flux: sum over sides of +-v_r.
      for (int r = 0; r < f.ncells(); ++r) {
        const double jr = (r == 0) ? 1.0 : -1.0;
        // Evaluate v's components from cell r at this point.
        const Eigen::MatrixXd DFr = cell_map_jacobian(mesh, f.cell[r], xhat);
        Eigen::VectorXd xr(2);
        xr[f.axis[r]] = static_cast<double>(f.side[r]);
        xr[1 - f.axis[r]] =
            (r == 1 && f.tangential_flip) ? -rule.points[q] : rule.points[q];
        Eigen::Vector2d vval = Eigen::Vector2d::Zero();
        for (int cj = 0; cj < 2; ++cj) {
          const auto& comp = disc.comps[cj];
          const int n0 = comp.degree[0] + 1;
          const Bundle1D& bx = (cj == 0) ? nb : tb;
          const Bundle1D& by = (cj == 1) ? nb : tb;
          Eigen::VectorXd px(1), py(1);
          px << xr[0];
          py << xr[1];
          const Eigen::MatrixXd Vx = bx.ref.eval_values(px);
          const Eigen::MatrixXd Vy = by.ref.eval_values(py);
          for (int j = 0; j < comp.dofs_per_cell; ++j)
            vval[cj] += v[comp.cell_dofs[f.cell[r]][j]] * Vx(0, j % n0) * Vy(0, j / n0) /
                        DFr(1 - cj, 1 - cj);
        }
        rhs -= rule.weights[q] * arc * jr * vval.dot(flux);
      }
    }
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("rt divergence: div(V_h) lands exactly in the pressure space") {
  Mesh mesh = table_mesh(2);
  const int p = 3;
  MixedSystem sys = build_mixed_system(mesh, MixedPair::RtDQ, p, 1.0, INFINITY);
  Bundle1D nb = make_bundle(Family1D::CG, p);
  Bundle1D tb = make_bundle(Family1D::DG, p - 1);

  Eigen::VectorXd u = random_free(*sys.disp, 7);
  Eigen::VectorXd q = sys.divergence_coefficients(u);
  // Pointwise divergence at the pressure collocation nodes.
  const QuadratureRule gl = gauss_legendre_rule(p);
  double max_diff = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Eigen::MatrixXd DF = cell_map_jacobian(mesh, c, Eigen::Vector2d::Zero());
    for (int i = 0; i < (int)sys.pres->comps[0].cell_dofs[c].size(); ++i) {
      const int i0 = i % p, i1 = i / p;
      Eigen::VectorXd xhat(2);
      xhat << gl.points[i0], gl.points[i1];
      double div = 0.0;
      for (int cj = 0; cj < 2; ++cj) {
        const auto& comp = sys.disp->comps[cj];
        const int n0 = comp.degree[0] + 1;
        const Bundle1D& bx = (cj == 0) ? nb : tb;
        const Bundle1D& by = (cj == 1) ? nb : tb;
        Eigen::VectorXd px(1), py(1);
        px << xhat[0];
        py << xhat[1];
        const Eigen::MatrixXd Vx = bx.ref.eval_values(px), Dx = bx.ref.eval_derivs(px);
        const Eigen::MatrixXd Vy = by.ref.eval_values(py), Dy = by.ref.eval_derivs(py);
        for (int j = 0; j < comp.dofs_per_cell; ++j) {
          const double dref = (cj == 0) ? Dx(0, j % n0) * Vy(0, j / n0)
                                        : Vx(0, j % n0) * Dy(0, j / n0);
          div += u[comp.cell_dofs[c][j]] * dref / (DF(0, 0) * DF(1, 1));
        }
      }
      max_diff = std::max(max_diff,
                          std::abs(div - q[sys.pres->comps[0].cell_dofs[c][i]]));
    }
  }
  CHECK(max_diff < 1e-12 * (1.0 + q.cwiseAbs().maxCoeff()));
}

TEST_CASE("mixed system basics: C block at lambda = inf, Mp diagonal") {
  Mesh mesh = table_mesh(2);
  MixedSystem sys = build_mixed_system(mesh, MixedPair::QpDQ, 3, 1.0, INFINITY);
  Eigen::VectorXd x = Eigen::VectorXd::Random(sys.n_u() + sys.n_p());
  sys.disp->project_free(x);
  Eigen::VectorXd y = sys.apply(x);
  Eigen::VectorXd Bu = sys.B * x.head(sys.n_u());
  CHECK((y.tail(sys.n_p()) - Bu).norm() == 0.0);  // no C contribution at inf

  // Pressure mass is exactly diagonal: compare against dense quadrature.
  const int pd = 1;  // DQ_{p-2} at p=3
  const QuadratureRule rule = gauss_legendre_rule(pd + 2);
  auto zres = reference_operators(pd, BasisKind::GlNodal);
  const Eigen::MatrixXd V = zres.eval_values(rule.points);
  Eigen::MatrixXd mass1d = V.transpose() * rule.weights.asDiagonal() * V;
  for (int i = 0; i <= pd; ++i)
    for (int j = 0; j <= pd; ++j)
      if (i != j) CHECK(std::abs(mass1d(i, j)) < 1e-15);
}

TEST_CASE("rt SDC relaxation equals the exact diagonal-block patch solve") {
  Mesh mesh = table_mesh(2);
  const int p = 3;
  const double mu = 1.0;
  const double eta = sipg_default_eta(p, 2);
  Discretization disc = rt_space(mesh, p);
  Bundle1D nb = make_bundle(Family1D::CG, p);
  Bundle1D tb = make_bundle(Family1D::DG, p - 1);
  GlobalOperator full = rt_operator(disc, nb, tb, mu, eta);
  TransformedSystem sys = rt_sdc_transformed(disc, nb, tb, mu, eta);
  SolverConfig config;
  PatchSolver patches = build_patch_solver(disc, sys.At, config);

  // Dense SDC oracle: component-diagonal part of the full operator.
  Eigen::MatrixXd Af = full.assemble_dense();
  Eigen::MatrixXd Asdc = Eigen::MatrixXd::Zero(disc.ndof, disc.ndof);
  for (int i = 0; i < disc.ndof; ++i)
    for (int j = 0; j < disc.ndof; ++j)
      if (disc.dof_component[i] == disc.dof_component[j]) Asdc(i, j) = Af(i, j);

  Eigen::VectorXd r = random_free(disc, 11);
  Eigen::VectorXd z = sys.apply_S(patches.apply(sys.apply_St(r)));
  Eigen::VectorXd z_oracle = Eigen::VectorXd::Zero(disc.ndof);
  for (const auto& patch : patches.patches) {
    const int np = static_cast<int>(patch.dofs.size());
    Eigen::MatrixXd Aj(np, np);
    Eigen::VectorXd rj(np);
    for (int i = 0; i < np; ++i) {
      rj[i] = r[patch.dofs[i]];
      for (int j = 0; j < np; ++j) Aj(i, j) = Asdc(patch.dofs[i], patch.dofs[j]);
    }
    Eigen::VectorXd cj = Aj.ldlt().solve(rj);
    for (int i = 0; i < np; ++i) z_oracle[patch.dofs[i]] += cj[i];
  }
  CHECK((z - z_oracle).cwiseAbs().maxCoeff() < 1e-9 * z_oracle.cwiseAbs().maxCoeff());
}

TEST_CASE("rt operator definiteness: default penalty SPD, zero penalty not") {
  Mesh mesh = table_mesh(2);
  const int p = 3;
  Discretization disc = rt_space(mesh, p);
  Bundle1D nb = make_bundle(Family1D::CG, p);
  Bundle1D tb = make_bundle(Family1D::DG, p - 1);
  Eigen::MatrixXd A_ok =
      rt_operator(disc, nb, tb, 1.0, sipg_default_eta(p, 2)).assemble_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A_ok);
  CHECK(es.eigenvalues()[0] > -1e-11);
  Eigen::MatrixXd A_bad = rt_operator(disc, nb, tb, 1.0, 0.0).assemble_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(A_bad);
  CHECK(es2.eigenvalues()[0] < -1e-8);
}

TEST_CASE("block preconditioner: decoupled limit acts block-wise") {
  Mesh mesh = table_mesh(2);
  MixedSystem sys = build_mixed_system(mesh, MixedPair::QpDQ, 3, 1.0, 10.0);
  SolverConfig config;
  BlockPrecond diag = build_block_precond(sys, false, config);
  BlockPrecond full = build_block_precond(sys, true, config);
  // With B zeroed the full product reduces to the diagonal action.
  MixedSystem decoupled = sys;
  decoupled.B.setZero();
  BlockPrecond fullz = full;
  fullz.sys = &decoupled;
  BlockPrecond diagz = diag;
  diagz.sys = &decoupled;
  Eigen::VectorXd r = Eigen::VectorXd::Random(sys.n_u() + sys.n_p());
  Eigen::VectorXd zd = diagz.apply(r);
  Eigen::VectorXd zf = fullz.apply(r);
  CHECK((zd.head(sys.n_u()) - zf.head(sys.n_u())).norm() < 1e-12 * zd.norm());
  CHECK((zd.tail(sys.n_p()) + zf.tail(sys.n_p())).norm() < 1e-12 * zd.norm());
}

TEST_CASE("Table-3/4 smoke: Q x DQ and RT rows at p=3, lambda=1") {
  Mesh mesh = table_mesh(8);
  SolverConfig config;
  auto body = [](const Eigen::Vector3d&) { return Eigen::Vector2d(0.0, -0.02); };
  {
    MixedSystem sys = build_mixed_system(mesh, MixedPair::QpDQ, 3, 1.0, 1.0);
    BlockPrecond bp = build_block_precond(sys, false, config);
    Eigen::VectorXd f = mixed_load(sys, body);
    auto [x, rep] = minres(sys.applier(), bp.applier(), f, 1e-8, 300);
    (void)x;
    CHECK(rep.converged);
    CHECK(rep.iterations >= 21);  // paper: 28
    CHECK(rep.iterations <= 35);
  }
  {
    MixedSystem sys = build_mixed_system(mesh, MixedPair::RtDQ, 3, 1.0, 1.0);
    BlockPrecond bp = build_block_precond(sys, false, config);
    Eigen::VectorXd f = mixed_load(sys, body);
    auto [x, rep] = minres(sys.applier(), bp.applier(), f, 1e-8, 300);
    (void)x;
    CHECK(rep.converged);
    CHECK(rep.iterations >= 18);  // paper: 24
    CHECK(rep.iterations <= 29);
  }
}

TEST_CASE("incompressible RT solution is pointwise divergence-free") {
  Mesh mesh = table_mesh(4);
  const int p = 3;
  MixedSystem sys = build_mixed_system(mesh, MixedPair::RtDQ, p, 1.0, INFINITY);
  SolverConfig config;
  BlockPrecond bp = build_block_precond(sys, false, config);
  Eigen::VectorXd f =
      mixed_load(sys, [](const Eigen::Vector3d&) { return Eigen::Vector2d(0.0, -0.02); });
  auto [x, rep] = minres(sys.applier(), bp.applier(), f, 1e-13, 600);
  REQUIRE(rep.converged);
  Eigen::VectorXd u = x.head(sys.n_u());
  Eigen::VectorXd div = sys.divergence_coefficients(u);
  CHECK(div.cwiseAbs().maxCoeff() <= 1e-9 * u.cwiseAbs().maxCoeff());
}
