#include "fdmstar/elasticity.hpp"

#include <stdexcept>

namespace fdmstar {

Eigen::VectorXd sdc_axis_coefficients(int comp, int dim, double mu, double lambda) {
  Eigen::VectorXd c = Eigen::VectorXd::Constant(dim, mu);
  c[comp] += mu + lambda;
  return c;
}

namespace {

// Physical-gradient evaluation matrices at the tensor quadrature points.
std::vector<Eigen::MatrixXd> physical_gradients(const Mesh& mesh, int cell,
                                                const Bundle1D& bundle,
                                                const QuadratureRule& rule,
                                                const CellGeometry& geom) {
  const int d = mesh.dim;
  const Eigen::MatrixXd V = bundle.ref.eval_values(rule.points);
  const Eigen::MatrixXd D = bundle.ref.eval_derivs(rule.points);
  std::vector<Eigen::MatrixXd> ref_grads(d);
  for (int a = 0; a < d; ++a) {
    Eigen::MatrixXd out = (d - 1 == a) ? D : V;
    for (int b = d - 2; b >= 0; --b) out = dense_kron(out, b == a ? D : V).eval();
    ref_grads[a] = out;
  }
  const int nq = static_cast<int>(ref_grads[0].rows());
  std::vector<Eigen::MatrixXd> phys(d, Eigen::MatrixXd::Zero(nq, ref_grads[0].cols()));
  for (int q = 0; q < nq; ++q) {
    const Eigen::MatrixXd invT = geom.jacobians[q].inverse().transpose();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (invT(a, b) != 0.0) phys[a].row(q) += invT(a, b) * ref_grads[b].row(q);
  }
  return phys;
}

}  // namespace

Eigen::MatrixXd elasticity_primal_cell(const Mesh& mesh, int cell, const Bundle1D& bundle,
                                       double mu, double lambda) {
  const int d = mesh.dim;
  const QuadratureRule rule = gauss_legendre_rule(bundle.degree + 2);
  CellGeometry geom = cell_geometry(mesh, cell, rule);
  std::vector<Eigen::MatrixXd> G = physical_gradients(mesh, cell, bundle, rule, geom);
  const int nloc = static_cast<int>(G[0].cols());
  const Eigen::VectorXd w = geom.quad_weights.cwiseProduct(geom.dets);

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(nloc, nloc);
  for (int a = 0; a < d; ++a) lap += G[a].transpose() * w.asDiagonal() * G[a];

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d * nloc, d * nloc);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Eigen::MatrixXd block = mu * G[j].transpose() * w.asDiagonal() * G[i] +
                              lambda * G[i].transpose() * w.asDiagonal() * G[j];
      if (i == j) block += mu * lap;
      M.block(i * nloc, j * nloc, nloc, nloc) = block;
    }
  return 0.5 * (M + M.transpose()).eval();
}

GlobalOperator elasticity_primal_operator(const Discretization& disc, const Bundle1D& bundle,
                                          double mu, double lambda) {
  if (disc.num_components() != disc.dim())
    throw std::invalid_argument("elasticity_primal_operator: vector space expected");
  if (!(lambda >= 0.0) || std::isinf(lambda))
    throw std::invalid_argument("elasticity_primal_operator: lambda must be finite");
  GlobalOperator op;
  op.disc = &disc;
  const Mesh& mesh = *disc.mesh;
  const int d = mesh.dim;
  const QuadratureRule rule = gauss_legendre_rule(bundle.degree + 2);
  const Eigen::MatrixXd& A = bundle.ref.stiffness;
  const Eigen::MatrixXd& B = bundle.ref.mass;
  const Eigen::MatrixXd& C = bundle.C;
  const Eigen::MatrixXd Ct = C.transpose();
  op.cells.resize(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellGeometry geom = cell_geometry(mesh, c, rule);
    if (geom.kind != MapKind::Cartesian) {
      op.cells[c].dense = elasticity_primal_cell(mesh, c, bundle, mu, lambda);
      continue;
    }
    for (int j = 0; j < d; ++j) {
      KronOperator diag;
      diag.dims.assign(d, bundle.degree + 1);
      const Eigen::VectorXd coeff = sdc_axis_coefficients(j, d, mu, lambda);
      for (int a = 0; a < d; ++a) {
        KronTerm term;
        term.coeff = coeff[a] * geom.mu[a];
        for (int b = 0; b < d; ++b) term.factors.push_back(b == a ? A : B);
        diag.terms.push_back(std::move(term));
      }
      op.cells[c].kron_blocks.emplace_back(j, j, std::move(diag));
    }
    double prod = 1.0;
    for (int a = 0; a < d; ++a) prod *= geom.lengths[a];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (i == j) continue;
        const double scale = prod / (geom.lengths[i] * geom.lengths[j]);
        KronOperator cross;
        cross.dims.assign(d, bundle.degree + 1);
        KronTerm t1, t2;
        t1.coeff = mu * scale;
        t2.coeff = lambda * scale;
        for (int a = 0; a < d; ++a) {
          t1.factors.push_back(a == i ? C : (a == j ? Ct : B));
          t2.factors.push_back(a == i ? Ct : (a == j ? C : B));
        }
        cross.terms.push_back(std::move(t1));
        cross.terms.push_back(std::move(t2));
        op.cells[c].kron_blocks.emplace_back(i, j, std::move(cross));
      }
  }
  return op;
}

TransformedSystem sdc_transformed(const Discretization& disc, const Bundle1D& bundle,
                                  double mu, double lambda) {
  TransformedSystem sys;
  sys.disc = &disc;
  const int d = disc.dim();
  sys.S_axis.resize(disc.num_components());
  sys.parity_axis.resize(disc.num_components());
  for (int ci = 0; ci < disc.num_components(); ++ci)
    for (int a = 0; a < d; ++a) {
      sys.S_axis[ci][a] = bundle.fdm.S;
      sys.parity_axis[ci][a] = bundle.fdm.parity;
    }
  sys.inv_multiplicity =
      Eigen::Map<const Eigen::VectorXd>(disc.multiplicity.data(), disc.ndof).cwiseInverse();

  const Mesh& mesh = *disc.mesh;
  const QuadratureRule rule = gauss_legendre_rule(bundle.degree + 2);
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellGeometry geom = cell_geometry(mesh, c, rule);
    for (int ci = 0; ci < disc.num_components(); ++ci) {
      const Eigen::VectorXd coeff = sdc_axis_coefficients(ci, d, mu, lambda);
      Eigen::SparseMatrix<double> cellm;
      for (int a = 0; a < d; ++a) {
        Eigen::SparseMatrix<double> term =
            (a == d - 1) ? bundle.fdm.A_t : bundle.fdm.B_t;
        for (int b = d - 2; b >= 0; --b)
          term = sparse_kron(term, b == a ? bundle.fdm.A_t : bundle.fdm.B_t).eval();
        term *= coeff[a] * geom.mu[a];
        cellm = (a == 0) ? term : (cellm + term).eval();
      }
      const auto& modes = disc.comps[ci].cell_modes[c];
      const Eigen::VectorXd sgn = sys.mode_signs(ci, c);
      for (int k = 0; k < cellm.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(cellm, k); it; ++it)
          if (!disc.constrained[modes[it.row()]] && !disc.constrained[modes[it.col()]])
            trips.emplace_back(modes[it.row()], modes[it.col()],
                               sgn[it.row()] * sgn[it.col()] * it.value());
    }
  }
  for (int i = 0; i < disc.ndof; ++i)
    if (disc.constrained[i]) trips.emplace_back(i, i, 1.0);
  sys.At.resize(disc.ndof, disc.ndof);
  sys.At.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

Eigen::VectorXd vector_load(const Discretization& disc, const Bundle1D& bundle,
                            const std::function<Eigen::VectorXd(const Eigen::Vector3d&)>& f) {
  const Mesh& mesh = *disc.mesh;
  const int d = mesh.dim;
  const QuadratureRule rule = gauss_legendre_rule(bundle.degree + 2);
  const Eigen::MatrixXd Vt = bundle.ref.eval_values(rule.points).transpose();
  const int nq1 = rule.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(disc.ndof);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellGeometry geom = cell_geometry(mesh, c, rule);
    const int nq = static_cast<int>(geom.dets.size());
    Eigen::MatrixXd fvals(nq, d);
    Eigen::VectorXd xhat(d);
    for (int q = 0; q < nq; ++q) {
      int qq = q;
      for (int a = 0; a < d; ++a) {
        xhat[a] = rule.points[qq % nq1];
        qq /= nq1;
      }
      fvals.row(q) = geom.quad_weights[q] * geom.dets[q] *
                     f(cell_map(mesh, c, xhat)).head(d).transpose();
    }
    for (int ci = 0; ci < d; ++ci) {
      Eigen::VectorXd g = fvals.col(ci);
      std::vector<int> dims(d, nq1);
      for (int a = 0; a < d; ++a) {
        g = apply_axis(Vt, g, dims, a);
        dims[a] = bundle.degree + 1;
      }
      for (size_t i = 0; i < disc.comps[ci].cell_dofs[c].size(); ++i)
        out[disc.comps[ci].cell_dofs[c][i]] += g[i];
    }
  }
  return out;
}

TwoLevel build_elasticity_twolevel(const Discretization& disc, const Bundle1D& bundle,
                                   std::shared_ptr<const GlobalOperator> A, double mu,
                                   double lambda, const SolverConfig& config) {
  TwoLevel tl;
  tl.A = [A](const Eigen::VectorXd& x) { return A->apply(x); };
  auto sys = std::make_shared<TransformedSystem>(sdc_transformed(disc, bundle, mu, lambda));
  tl.sys = sys;
  tl.patches = build_patch_solver(disc, sys->At, config);

  Discretization coarse_disc = vector_q_space(*disc.mesh, config.coarse_degree);
  Bundle1D coarse_bundle = make_bundle(Family1D::CG, config.coarse_degree);
  GlobalOperator coarse_op =
      elasticity_primal_operator(coarse_disc, coarse_bundle, mu, lambda);
  tl.coarse = std::make_shared<CholFactor>(
      cholesky(coarse_op.assemble(), natural_ordering(coarse_disc.ndof)));

  std::vector<std::array<Eigen::MatrixXd, 3>> phat(disc.num_components());
  for (int ci = 0; ci < disc.num_components(); ++ci)
    for (int a = 0; a < disc.dim(); ++a)
      phat[ci][a] = coarse_bundle.ref.eval_values(bundle.ref.nodes);
  tl.prolong = build_prolongation(disc, coarse_disc, phat);

  calibrate_damping(tl, disc, config);
  return tl;
}

}  // namespace fdmstar
