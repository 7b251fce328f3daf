#include "fdmstar/mixed.hpp"

#include <cmath>
#include <stdexcept>

namespace fdmstar {

namespace {

// int f_a g_b over the interval, with optional derivatives, by a shared rule.
Eigen::MatrixXd pair_integral(const ReferenceInterval& f, bool df,
                              const ReferenceInterval& g, bool dg) {
  const int n = std::max(f.degree, g.degree) + 1;
  const QuadratureRule rule = gauss_legendre_rule(n + 1);
  const Eigen::MatrixXd F = df ? f.eval_derivs(rule.points) : f.eval_values(rule.points);
  const Eigen::MatrixXd G = dg ? g.eval_derivs(rule.points) : g.eval_values(rule.points);
  return F.transpose() * rule.weights.asDiagonal() * G;
}

void check_cartesian(const Mesh& mesh) {
  const QuadratureRule rule = gauss_legendre_rule(2);
  for (int c = 0; c < mesh.num_cells(); ++c)
    if (cell_geometry(mesh, c, rule).kind != MapKind::Cartesian)
      throw std::invalid_argument("mixed formulations require Cartesian meshes");
}

Eigen::Vector2d cell_half_lengths(const Mesh& mesh, int cell) {
  Eigen::VectorXd center = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd DF = cell_map_jacobian(mesh, cell, center);
  return {DF(0, 0), DF(1, 1)};
}

}  // namespace

GlobalOperator rt_operator(const Discretization& disc, const Bundle1D& normal,
                           const Bundle1D& tangent, double mu, double eta) {
  const Mesh& mesh = *disc.mesh;
  if (mesh.dim != 2) throw std::invalid_argument("rt_operator: 2D only");
  check_cartesian(mesh);
  GlobalOperator op;
  op.disc = &disc;
  const int p = normal.degree;
  const Eigen::MatrixXd P_vd = pair_integral(normal.ref, false, tangent.ref, true);
  const Eigen::MatrixXd P_dv = P_vd.transpose();

  op.cells.resize(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Eigen::Vector2d L = cell_half_lengths(mesh, c);
    const double prod = L[0] * L[1];
    for (int j = 0; j < 2; ++j) {
      const int o = 1 - j;
      KronOperator diag;
      diag.dims = {disc.comps[j].degree[0] + 1, disc.comps[j].degree[1] + 1};
      KronTerm grad_n;  // 2 mu (d_j u_j)^2
      grad_n.coeff = 2.0 * mu / prod;
      KronTerm grad_t;  // mu (d_o u_j)^2 from the shear term
      grad_t.coeff = mu * L[j] / (L[o] * L[o] * L[o]);
      for (int a = 0; a < 2; ++a) {
        grad_n.factors.push_back(a == j ? normal.ref.stiffness : tangent.ref.mass);
        grad_t.factors.push_back(a == j ? normal.ref.mass : tangent.ref.stiffness);
      }
      diag.terms.push_back(std::move(grad_n));
      diag.terms.push_back(std::move(grad_t));
      op.cells[c].kron_blocks.emplace_back(j, j, std::move(diag));
    }
    // Shear cross block: mu d_y v_x d_x u_y and its transpose.
    KronOperator cross01;
    cross01.dims = {disc.comps[1].degree[0] + 1, disc.comps[1].degree[1] + 1};
    KronTerm t01;
    t01.coeff = mu / prod;
    t01.factors.push_back(P_vd);  // axis x: X test value, Y trial derivative
    t01.factors.push_back(P_dv);  // axis y: Y test derivative, X trial value
    cross01.terms.push_back(std::move(t01));
    op.cells[c].kron_blocks.emplace_back(0, 1, std::move(cross01));
    KronOperator cross10;
    cross10.dims = {disc.comps[0].degree[0] + 1, disc.comps[0].degree[1] + 1};
    KronTerm t10;
    t10.coeff = mu / prod;
    t10.factors.push_back(P_dv);
    t10.factors.push_back(P_vd);
    cross10.terms.push_back(std::move(t10));
    op.cells[c].kron_blocks.emplace_back(1, 0, std::move(cross10));
  }

  // Facet terms by quadrature: full vector interior-penalty blocks.
  const QuadratureRule rule = gauss_legendre_rule(p + 2);
  const int nloc0 = disc.comps[0].dofs_per_cell;
  const int nloc1 = disc.comps[1].dofs_per_cell;
  const int ncell_dofs = nloc0 + nloc1;
  for (int fi = 0; fi < static_cast<int>(mesh.facets.size()); ++fi) {
    const Facet& f = mesh.facets[fi];
    if (f.tag == FacetTag::Neumann) continue;
    const int ncells = f.ncells();
    const double pen = eta * mu * 2.0 * reciprocal_facet_length(mesh, fi);

    GlobalOperator::FacetTerm term;
    term.facet = fi;
    term.dense = Eigen::MatrixXd::Zero(ncells * ncell_dofs, ncells * ncell_dofs);

    for (int q = 0; q < rule.size(); ++q) {
      const double t = rule.points[q];
      std::array<Eigen::MatrixXd, 2> val;   // [side] (2 x dofs): component values
      std::array<Eigen::MatrixXd, 2> wfn;   // [side] (2 x dofs): (F(grad u) n)_i / mu
      double arc = 0.0;
      Eigen::Vector2d normal_vec;
      for (int r = 0; r < ncells; ++r) {
        const int axis = f.axis[r];
        const int tangent_axis = 1 - axis;
        const double tr = (r == 1 && f.tangential_flip) ? -t : t;
        Eigen::VectorXd xhat(2);
        xhat[axis] = static_cast<double>(f.side[r]);
        xhat[tangent_axis] = tr;
        const Eigen::MatrixXd DF = cell_map_jacobian(mesh, f.cell[r], xhat);
        const Eigen::Vector2d L(DF(0, 0), DF(1, 1));
        if (r == 0) {
          arc = DF.col(tangent_axis).norm();
          normal_vec.setZero();
          normal_vec[axis] = static_cast<double>(f.side[0]);
        }
        val[r].setZero(2, ncell_dofs);
        wfn[r].setZero(2, ncell_dofs);
        int offset = 0;
        for (int cj = 0; cj < 2; ++cj) {
          const auto& comp = disc.comps[cj];
          const int n0 = comp.degree[0] + 1;
          const double piola = 1.0 / L[1 - cj];
          std::array<Eigen::MatrixXd, 2> V, D;
          for (int a = 0; a < 2; ++a) {
            Eigen::VectorXd pt(1);
            pt << xhat[a];
            const ReferenceInterval& fam = (a == cj) ? normal.ref : tangent.ref;
            V[a] = fam.eval_values(pt);
            D[a] = fam.eval_derivs(pt);
          }
          for (int jdof = 0; jdof < comp.dofs_per_cell; ++jdof) {
            const int j0 = jdof % n0, j1 = jdof / n0;
            const double v = V[0](0, j0) * V[1](0, j1);
            const Eigen::Vector2d grad(
                D[0](0, j0) * V[1](0, j1) / L[0],
                V[0](0, j0) * D[1](0, j1) / L[1]);
            val[r](cj, offset + jdof) = piola * v;
            // (grad u + grad u^T) n for a trial function in component cj.
            const double nd = normal_vec.dot(grad) * piola;
            for (int i = 0; i < 2; ++i)
              wfn[r](i, offset + jdof) +=
                  (i == cj ? nd : 0.0) + normal_vec[cj] * piola * grad[i];
          }
          offset += comp.dofs_per_cell;
        }
      }
      const double w = rule.weights[q] * arc;
      for (int r = 0; r < ncells; ++r)
        for (int s = 0; s < ncells; ++s) {
          const double jr = (r == 0) ? 1.0 : -1.0;
          const double js = (s == 0) ? 1.0 : -1.0;
          const double avg = (ncells == 2) ? 0.5 : 1.0;
          Eigen::MatrixXd block =
              pen * jr * js *
                  (val[r].transpose() * val[s] +
                   (normal_vec.transpose() * val[r]).transpose() *
                       (normal_vec.transpose() * val[s])) -
              avg * mu * jr * val[r].transpose() * wfn[s] -
              avg * mu * js * wfn[r].transpose() * val[s];
          term.dense.block(r * ncell_dofs, s * ncell_dofs, ncell_dofs, ncell_dofs) +=
              w * block;
        }
    }
    op.facets.push_back(std::move(term));
  }
  return op;
}

TransformedSystem rt_sdc_transformed(const Discretization& disc, const Bundle1D& normal,
                                     const Bundle1D& tangent, double mu, double eta) {
  const Mesh& mesh = *disc.mesh;
  check_cartesian(mesh);
  TransformedSystem sys;
  sys.disc = &disc;
  sys.S_axis.resize(2);
  sys.parity_axis.resize(2);
  for (int j = 0; j < 2; ++j)
    for (int a = 0; a < 2; ++a) {
      const Bundle1D& b = (a == j) ? normal : tangent;
      sys.S_axis[j][a] = b.fdm.S;
      sys.parity_axis[j][a] = b.fdm.parity;
    }
  sys.inv_multiplicity =
      Eigen::Map<const Eigen::VectorXd>(disc.multiplicity.data(), disc.ndof).cwiseInverse();

  std::vector<Eigen::Triplet<double>> trips;
  auto scatter = [&](const Eigen::SparseMatrix<double>& block, const std::vector<int>& rows,
                     const std::vector<int>& cols) {
    for (int k = 0; k < block.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(block, k); it; ++it)
        if (!disc.constrained[rows[it.row()]] && !disc.constrained[cols[it.col()]])
          trips.emplace_back(rows[it.row()], cols[it.col()], it.value());
  };
  auto kron2 = [](const Eigen::SparseMatrix<double>& f0,
                  const Eigen::SparseMatrix<double>& f1) { return sparse_kron(f1, f0); };

  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Eigen::Vector2d L = cell_half_lengths(mesh, c);
    const double prod = L[0] * L[1];
    for (int j = 0; j < 2; ++j) {
      const int o = 1 - j;
      const Eigen::SparseMatrix<double>& An = normal.fdm.A_t;
      const Eigen::SparseMatrix<double>& Bn = normal.fdm.B_t;
      const Eigen::SparseMatrix<double>& At = tangent.fdm.A_t;
      const Eigen::SparseMatrix<double>& Bt = tangent.fdm.B_t;
      Eigen::SparseMatrix<double> cellm;
      {
        Eigen::SparseMatrix<double> term =
            (j == 0) ? kron2(An, Bt) : kron2(Bt, An);
        term *= 2.0 * mu / prod;
        cellm = term;
      }
      {
        Eigen::SparseMatrix<double> term =
            (j == 0) ? kron2(Bn, At) : kron2(At, Bn);
        term *= mu * L[j] / (L[o] * L[o] * L[o]);
        cellm += term;
      }
      scatter(cellm, disc.comps[j].cell_modes[c], disc.comps[j].cell_modes[c]);
    }
  }

  // Tangential interior-penalty terms of the diagonal blocks: component j on
  // facets whose normal is the other axis.
  const int pt = tangent.degree;
  for (int fi = 0; fi < static_cast<int>(mesh.facets.size()); ++fi) {
    const Facet& f = mesh.facets[fi];
    if (f.tag == FacetTag::Neumann) continue;
    const int m = f.axis[0];  // facet normal axis (consistent on Cartesian)
    const int j = 1 - m;      // tangential component treated weakly here
    const int ncells = f.ncells();
    std::array<double, 2> Lm{1.0, 1.0}, Lj{1.0, 1.0}, piola{0.0, 0.0};
    for (int r = 0; r < ncells; ++r) {
      const Eigen::Vector2d L = cell_half_lengths(mesh, f.cell[r]);
      Lm[r] = L[m];
      Lj[r] = L[j];
      piola[r] = 1.0 / L[m];
    }
    const double hinv = (ncells == 2) ? 0.5 * (1.0 / Lm[0] + 1.0 / Lm[1]) : 1.0 / Lm[0];
    const double pen = eta * mu * hinv;
    const double avg = (ncells == 2) ? 0.5 : 1.0;

    const Eigen::MatrixXd& dtr = tangent.fdm.deriv_traces;  // outward
    for (int r = 0; r < ncells; ++r)
      for (int s = 0; s < ncells; ++s) {
        const double sgn = (r == s) ? 1.0 : -1.0;  // (-1)^{r-s}
        const int tau_r = (f.side[r] > 0) ? pt : 0;
        const int tau_s = (f.side[s] > 0) ? pt : 0;
        const Eigen::VectorXd dr = dtr.row(f.side[r] > 0 ? 1 : 0);
        const Eigen::VectorXd ds = dtr.row(f.side[s] > 0 ? 1 : 0);
        std::vector<Eigen::Triplet<double>> et;
        et.emplace_back(tau_r, tau_s, pen * sgn * piola[r] * piola[s] * Lj[0]);
        for (int k = 0; k <= pt; ++k) {
          et.emplace_back(tau_r, k,
                          -avg * mu * sgn * piola[r] * Lj[0] * ds[k] / (Lm[s] * Lm[s]));
          et.emplace_back(k, tau_s,
                          -avg * mu * sgn * piola[s] * Lj[0] * dr[k] / (Lm[r] * Lm[r]));
        }
        Eigen::SparseMatrix<double> E(pt + 1, pt + 1);
        E.setFromTriplets(et.begin(), et.end());
        const Eigen::SparseMatrix<double>& Bj = normal.fdm.B_t;
        Eigen::SparseMatrix<double> block =
            (m == 0) ? kron2(E, Bj) : kron2(Bj, E);
        scatter(block, disc.comps[j].cell_modes[f.cell[r]],
                disc.comps[j].cell_modes[f.cell[s]]);
      }
  }

  for (int i = 0; i < disc.ndof; ++i)
    if (disc.constrained[i]) trips.emplace_back(i, i, 1.0);
  sys.At.resize(disc.ndof, disc.ndof);
  sys.At.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

Eigen::VectorXd MixedSystem::apply(const Eigen::VectorXd& x) const {
  const int nu = n_u(), np = n_p();
  Eigen::VectorXd u = x.head(nu), p = x.tail(np);
  Eigen::VectorXd y(nu + np);
  y.head(nu) = A->apply(u) + B.transpose() * p;
  y.tail(np) = B * u;
  if (!std::isinf(lambda)) y.tail(np) -= (1.0 / lambda) * Mp_diag.cwiseProduct(p);
  return y;
}

LinOp MixedSystem::applier() const {
  return [this](const Eigen::VectorXd& x) { return apply(x); };
}

Eigen::VectorXd MixedSystem::divergence_coefficients(const Eigen::VectorXd& u) const {
  return (B * u).cwiseQuotient(Mp_diag);
}

MixedSystem build_mixed_system(const Mesh& mesh, MixedPair pair, int p, double mu,
                               double lambda) {
  if (mesh.dim != 2) throw std::invalid_argument("mixed formulations: 2D only");
  check_cartesian(mesh);
  MixedSystem sys;
  sys.pair = pair;
  sys.mu = mu;
  sys.lambda = lambda;

  const int pres_degree = (pair == MixedPair::QpDQ) ? p - 2 : p - 1;
  if (pres_degree < 0)
    throw std::invalid_argument("build_mixed_system: degree too low for the pressure space");
  Discretization::Component pc;
  pc.family = {Family1D::DG, Family1D::DG, Family1D::DG};
  pc.degree = {pres_degree, pres_degree, pres_degree};

  if (pair == MixedPair::QpDQ) {
    sys.disp = std::make_shared<Discretization>(vector_q_space(mesh, p));
    Bundle1D bundle = make_bundle(Family1D::CG, p);
    sys.A = std::make_shared<GlobalOperator>(
        elasticity_primal_operator(*sys.disp, bundle, mu, 0.0));
  } else {
    sys.eta = sipg_default_eta(p, 2);
    sys.disp = std::make_shared<Discretization>(rt_space(mesh, p));
    Bundle1D nb = make_bundle(Family1D::CG, p);
    Bundle1D tb = make_bundle(Family1D::DG, p - 1);
    sys.A = std::make_shared<GlobalOperator>(rt_operator(*sys.disp, nb, tb, mu, sys.eta));
  }
  sys.pres = std::make_shared<Discretization>(dq_space(mesh, pres_degree));

  // Pressure mass diagonal (GL nodal basis on Cartesian cells).
  const QuadratureRule glq = gauss_legendre_rule(pres_degree + 1);
  sys.Mp_diag.resize(sys.pres->ndof);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Eigen::Vector2d L = cell_half_lengths(mesh, c);
    const auto& dofs = sys.pres->comps[0].cell_dofs[c];
    for (size_t i = 0; i < dofs.size(); ++i) {
      const int i0 = static_cast<int>(i) % (pres_degree + 1);
      const int i1 = static_cast<int>(i) / (pres_degree + 1);
      sys.Mp_diag[dofs[i]] = L[0] * L[1] * glq.weights[i0] * glq.weights[i1];
    }
  }

  // Divergence coupling B.
  const ReferenceInterval zres = reference_operators(std::max(pres_degree, 0), BasisKind::GlNodal);
  std::vector<Eigen::Triplet<double>> bt;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Eigen::Vector2d L = cell_half_lengths(mesh, c);
    for (int j = 0; j < 2; ++j) {
      const auto& comp = sys.disp->comps[j];
      std::array<Eigen::MatrixXd, 2> fac;
      double scale = 1.0;
      for (int a = 0; a < 2; ++a) {
        const ReferenceInterval fam =
            (comp.family[a] == Family1D::CG)
                ? reference_operators(comp.degree[a], BasisKind::GllNodal)
                : reference_operators(comp.degree[a], BasisKind::GlNodal);
        fac[a] = pair_integral(zres, false, fam, a == j);
      }
      if (pair == MixedPair::QpDQ) scale = L[0] * L[1] / L[j];  // Piola cancels for RT
      const auto& pd = sys.pres->comps[0].cell_dofs[c];
      const auto& ud = comp.cell_dofs[c];
      const int zn = pres_degree + 1;
      const int un0 = comp.degree[0] + 1;
      for (int ri = 0; ri < static_cast<int>(pd.size()); ++ri) {
        const int r0 = ri % zn, r1 = ri / zn;
        for (int cjj = 0; cjj < static_cast<int>(ud.size()); ++cjj) {
          if (sys.disp->constrained[ud[cjj]]) continue;
          const int c0 = cjj % un0, c1 = cjj / un0;
          const double v = scale * fac[0](r0, c0) * fac[1](r1, c1);
          if (v != 0.0) bt.emplace_back(pd[ri], ud[cjj], v);
        }
      }
    }
  }
  sys.B.resize(sys.pres->ndof, sys.disp->ndof);
  sys.B.setFromTriplets(bt.begin(), bt.end());
  return sys;
}

Eigen::VectorXd BlockPrecond::apply(const Eigen::VectorXd& r) const {
  const int nu = sys->n_u(), np = sys->n_p();
  Eigen::VectorXd z(nu + np);
  if (!full) {
    z.head(nu) = P1.apply(r.head(nu));
    z.tail(np) = P2_inv_diag.cwiseProduct(r.tail(np));
    return z;
  }
  Eigen::VectorXd t1 = P1.apply(r.head(nu));
  Eigen::VectorXd s = r.tail(np) - sys->B * t1;
  Eigen::VectorXd zp = -P2_inv_diag.cwiseProduct(s);
  z.head(nu) = t1 - P1.apply(sys->B.transpose() * zp);
  z.tail(np) = zp;
  return z;
}

LinOp BlockPrecond::applier() const {
  return [this](const Eigen::VectorXd& r) { return apply(r); };
}

BlockPrecond build_block_precond(const MixedSystem& sys, bool full,
                                 const SolverConfig& config) {
  BlockPrecond bp;
  bp.full = full;
  bp.sys = &sys;
  const Mesh& mesh = *sys.disp->mesh;
  const int p = sys.disp->comps[0].degree[0];

  TwoLevel& tl = bp.P1;
  std::shared_ptr<const GlobalOperator> A = sys.A;
  tl.A = [A](const Eigen::VectorXd& x) { return A->apply(x); };
  if (sys.pair == MixedPair::QpDQ) {
    Bundle1D bundle = make_bundle(Family1D::CG, p);
    auto tsys = std::make_shared<TransformedSystem>(
        sdc_transformed(*sys.disp, bundle, sys.mu, 0.0));
    tl.sys = tsys;
    tl.patches = build_patch_solver(*sys.disp, tsys->At, config);
    Discretization coarse = vector_q_space(mesh, 1);
    Bundle1D cb = make_bundle(Family1D::CG, 1);
    GlobalOperator cop = elasticity_primal_operator(coarse, cb, sys.mu, 0.0);
    tl.coarse = std::make_shared<CholFactor>(
        cholesky(cop.assemble(), natural_ordering(coarse.ndof)));
    std::vector<std::array<Eigen::MatrixXd, 3>> phat(2);
    for (int ci = 0; ci < 2; ++ci)
      for (int a = 0; a < 2; ++a) phat[ci][a] = cb.ref.eval_values(bundle.ref.nodes);
    tl.prolong = build_prolongation(*sys.disp, coarse, phat);
  } else {
    Bundle1D nb = make_bundle(Family1D::CG, p);
    Bundle1D tb = make_bundle(Family1D::DG, p - 1);
    auto tsys = std::make_shared<TransformedSystem>(
        rt_sdc_transformed(*sys.disp, nb, tb, sys.mu, sys.eta));
    tl.sys = tsys;
    tl.patches = build_patch_solver(*sys.disp, tsys->At, config);
    const int pc = 2;
    Discretization coarse = rt_space(mesh, pc);
    Bundle1D cnb = make_bundle(Family1D::CG, pc);
    Bundle1D ctb = make_bundle(Family1D::DG, pc - 1);
    // Same penalty as the fine level so the coarse matrix is the Galerkin
    // restriction of the fine form (nested spaces).
    GlobalOperator cop = rt_operator(coarse, cnb, ctb, sys.mu, sys.eta);
    tl.coarse = std::make_shared<CholFactor>(
        cholesky(cop.assemble(), natural_ordering(coarse.ndof)));
    std::vector<std::array<Eigen::MatrixXd, 3>> phat(2);
    for (int ci = 0; ci < 2; ++ci)
      for (int a = 0; a < 2; ++a) {
        const Bundle1D& fine_b = (a == ci) ? nb : tb;
        const Bundle1D& coarse_b = (a == ci) ? cnb : ctb;
        phat[ci][a] = coarse_b.ref.eval_values(fine_b.ref.nodes);
      }
    tl.prolong = build_prolongation(*sys.disp, coarse, phat);
  }
  calibrate_damping(tl, *sys.disp, config);

  const double scale = 1.0 / sys.mu + (std::isinf(sys.lambda) ? 0.0 : 1.0 / sys.lambda);
  bp.P2_inv_diag = (scale * sys.Mp_diag).cwiseInverse();
  return bp;
}

Eigen::VectorXd mixed_load(const MixedSystem& sys,
                           const std::function<Eigen::VectorXd(const Eigen::Vector3d&)>& body) {
  const Mesh& mesh = *sys.disp->mesh;
  const Discretization& disp = *sys.disp;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(sys.n_u() + sys.n_p());
  const int p = disp.comps[0].degree[0];
  const QuadratureRule rule = gauss_legendre_rule(p + 2);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Eigen::Vector2d L = cell_half_lengths(mesh, c);
    for (int cj = 0; cj < disp.num_components(); ++cj) {
      const auto& comp = disp.comps[cj];
      std::array<Eigen::MatrixXd, 2> V;
      for (int a = 0; a < 2; ++a) {
        const ReferenceInterval fam =
            (comp.family[a] == Family1D::CG)
                ? reference_operators(comp.degree[a], BasisKind::GllNodal)
                : reference_operators(comp.degree[a], BasisKind::GlNodal);
        V[a] = fam.eval_values(rule.points);
      }
      const bool piola = sys.pair == MixedPair::RtDQ;
      const double scale = L[0] * L[1] * (piola ? 1.0 / L[1 - cj] : 1.0);
      const int n0 = comp.degree[0] + 1;
      Eigen::VectorXd loc = Eigen::VectorXd::Zero(comp.dofs_per_cell);
      for (int q0 = 0; q0 < rule.size(); ++q0)
        for (int q1 = 0; q1 < rule.size(); ++q1) {
          Eigen::VectorXd xhat(2);
          xhat << rule.points[q0], rule.points[q1];
          const double fv = body(cell_map(mesh, c, xhat))[cj];
          const double w = rule.weights[q0] * rule.weights[q1] * scale * fv;
          if (w == 0.0) continue;
          for (int j = 0; j < comp.dofs_per_cell; ++j)
            loc[j] += w * V[0](q0, j % n0) * V[1](q1, j / n0);
        }
      for (int j = 0; j < comp.dofs_per_cell; ++j)
        if (!disp.constrained[comp.cell_dofs[c][j]])
          f[comp.cell_dofs[c][j]] += loc[j];
    }
  }
  return f;
}

}  // namespace fdmstar
