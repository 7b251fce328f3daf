#include "fdmstar/sipg.hpp"

#include <stdexcept>

namespace fdmstar {

double sipg_default_eta(int p, int d) { return (p + 1.0) * (p + d); }

namespace {

Eigen::VectorXd trace_row(const ReferenceInterval& ref, int side) {
  return ref.trace_values.row(side > 0 ? 1 : 0);
}
Eigen::VectorXd deriv_row(const ReferenceInterval& ref, int side) {
  return ref.trace_normal_derivs.row(side > 0 ? 1 : 0);
}

}  // namespace

Eigen::MatrixXd sipg_facet_dirichlet(const ReferenceInterval& ref, double mu_e,
                                     double eta, int side) {
  const Eigen::VectorXd t = trace_row(ref, side);
  const Eigen::VectorXd d = deriv_row(ref, side);
  return mu_e * (eta * t * t.transpose() - t * d.transpose() - d * t.transpose());
}

Eigen::MatrixXd sipg_facet_interior(const ReferenceInterval& ref, double mu0, double mu1,
                                    double eta, int side0, int side1) {
  const int n = ref.degree + 1;
  const double mu[2] = {mu0, mu1};
  const int sides[2] = {side0, side1};
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int r = 0; r < 2; ++r)
    for (int s = 0; s < 2; ++s) {
      const Eigen::VectorXd tr = trace_row(ref, sides[r]);
      const Eigen::VectorXd ts = trace_row(ref, sides[s]);
      const Eigen::VectorXd dr = deriv_row(ref, sides[r]);
      const Eigen::VectorXd ds = deriv_row(ref, sides[s]);
      const double sign = (r == s) ? 0.5 : -0.5;
      E.block(r * n, s * n, n, n) =
          sign * (eta * (mu0 + mu1) * tr * ts.transpose() - mu[s] * tr * ds.transpose() -
                  mu[r] * dr * ts.transpose());
    }
  return E;
}

Eigen::SparseMatrix<double> sipg_facet_dirichlet_t(const FdmBasis& fdm, double mu_e,
                                                   double eta, int side) {
  const int p = fdm.degree;
  const int tau = (side > 0) ? p : 0;
  const Eigen::VectorXd d = fdm.deriv_traces.row(side > 0 ? 1 : 0);
  std::vector<Eigen::Triplet<double>> trips;
  trips.emplace_back(tau, tau, eta * mu_e);
  for (int j = 0; j <= p; ++j) {
    trips.emplace_back(tau, j, -mu_e * d[j]);
    trips.emplace_back(j, tau, -mu_e * d[j]);
  }
  Eigen::SparseMatrix<double> E(p + 1, p + 1);
  E.setFromTriplets(trips.begin(), trips.end());
  return E;
}

Eigen::SparseMatrix<double> sipg_facet_interior_t(const FdmBasis& fdm, double mu0,
                                                  double mu1, double eta, int side0,
                                                  int side1, int block_r, int block_s) {
  const int p = fdm.degree;
  const double mu[2] = {mu0, mu1};
  const int sides[2] = {side0, side1};
  const int tau_r = (sides[block_r] > 0) ? p : 0;
  const int tau_s = (sides[block_s] > 0) ? p : 0;
  const Eigen::VectorXd dr = fdm.deriv_traces.row(sides[block_r] > 0 ? 1 : 0);
  const Eigen::VectorXd ds = fdm.deriv_traces.row(sides[block_s] > 0 ? 1 : 0);
  const double sign = (block_r == block_s) ? 0.5 : -0.5;
  std::vector<Eigen::Triplet<double>> trips;
  trips.emplace_back(tau_r, tau_s, sign * eta * (mu0 + mu1));
  for (int j = 0; j <= p; ++j) {
    trips.emplace_back(tau_r, j, -sign * mu[block_s] * ds[j]);
    trips.emplace_back(j, tau_s, -sign * mu[block_r] * dr[j]);
  }
  Eigen::SparseMatrix<double> E(p + 1, p + 1);
  E.setFromTriplets(trips.begin(), trips.end());
  return E;
}

Eigen::SparseMatrix<double> reflected_mass_t(const FdmBasis& fdm) {
  const int p = fdm.degree;
  std::vector<Eigen::Triplet<double>> trips;
  trips.emplace_back(p, 0, 1.0);  // reflected left-interface mode = right mode
  trips.emplace_back(0, p, 1.0);
  for (int j = 1; j < p; ++j) trips.emplace_back(j, j, fdm.parity[j]);
  Eigen::SparseMatrix<double> Pi(p + 1, p + 1);
  Pi.setFromTriplets(trips.begin(), trips.end());
  return (fdm.B_t * Pi).pruned(0.0);
}

namespace {

// Dense SIPG facet block by quadrature for general 2D cells.
Eigen::MatrixXd facet_block_quadrature(const Mesh& mesh, int facet, const Bundle1D& bundle,
                                       double eta) {
  const Facet& f = mesh.facets[facet];
  const int p = bundle.degree;
  const int n1 = p + 1;
  const int nloc = n1 * n1;
  const int ncells = f.ncells();
  const QuadratureRule rule = gauss_legendre_rule(p + 2);
  const double pen = eta * 2.0 * reciprocal_facet_length(mesh, facet);

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(ncells * nloc, ncells * nloc);
  for (int q = 0; q < rule.size(); ++q) {
    const double t = rule.points[q];
    // Side data: trace values and physical gradients of all local functions.
    std::array<Eigen::VectorXd, 2> val;
    std::array<Eigen::VectorXd, 2> nder;  // n . grad(phi)
    double arc = 0.0;
    Eigen::Vector2d normal;
    for (int r = 0; r < ncells; ++r) {
      const int axis = f.axis[r];
      const int tangent = 1 - axis;
      const double tr = (r == 1 && f.tangential_flip) ? -t : t;
      Eigen::VectorXd xhat(2);
      xhat[axis] = static_cast<double>(f.side[r]);
      xhat[tangent] = tr;
      Eigen::VectorXd pt(1);
      pt << tr;
      const Eigen::MatrixXd Vt = bundle.ref.eval_values(pt);
      const Eigen::MatrixXd Dt = bundle.ref.eval_derivs(pt);
      const Eigen::VectorXd vn = trace_row(bundle.ref, f.side[r]);
      const Eigen::VectorXd dn = bundle.ref.eval_derivs(
          (Eigen::VectorXd(1) << static_cast<double>(f.side[r])).finished()).row(0);

      const Eigen::MatrixXd DF = cell_map_jacobian(mesh, f.cell[r], xhat);
      const Eigen::MatrixXd DFinvT = DF.inverse().transpose();
      if (r == 0) {
        // Outward unit normal and the arc element from side 0.
        Eigen::Vector2d tangent_vec = DF.col(tangent);
        arc = tangent_vec.norm();
        Eigen::Vector2d nref = Eigen::Vector2d::Zero();
        nref[axis] = static_cast<double>(f.side[0]);
        normal = (DFinvT * nref).normalized();
      }
      val[r].resize(nloc);
      nder[r].resize(nloc);
      for (int j = 0; j < nloc; ++j) {
        const int ja = j % n1, jb = j / n1;
        const int jn = (axis == 0) ? ja : jb;
        const int jt = (axis == 0) ? jb : ja;
        val[r][j] = vn[jn] * Vt(0, jt);
        Eigen::Vector2d gref;
        gref[axis] = dn[jn] * Vt(0, jt);
        gref[tangent] = vn[jn] * Dt(0, jt);
        nder[r][j] = normal.dot(DFinvT * gref);
      }
    }
    const double w = rule.weights[q] * arc;
    if (ncells == 1) {
      M += w * (pen * val[0] * val[0].transpose() - val[0] * nder[0].transpose() -
                nder[0] * val[0].transpose());
    } else {
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) {
          const double jr = (r == 0) ? 1.0 : -1.0;
          const double js = (s == 0) ? 1.0 : -1.0;
          M.block(r * nloc, s * nloc, nloc, nloc) +=
              w * (pen * jr * js * val[r] * val[s].transpose() -
                   0.5 * jr * val[r] * nder[s].transpose() -
                   0.5 * js * nder[r] * val[s].transpose());
        }
    }
  }
  return M;
}

}  // namespace

GlobalOperator dg_poisson_operator(const Discretization& disc, const Bundle1D& bundle,
                                   double eta) {
  if (disc.num_components() != 1 || disc.comps[0].family[0] != Family1D::DG)
    throw std::invalid_argument("dg_poisson_operator: discontinuous scalar space expected");
  GlobalOperator op;
  op.disc = &disc;
  const Mesh& mesh = *disc.mesh;
  const int d = mesh.dim;
  const QuadratureRule rule = gauss_legendre_rule(bundle.degree + 2);
  std::vector<CellGeometry> geoms;
  op.cells.resize(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    geoms.push_back(cell_geometry(mesh, c, rule));
    op.cells[c] = scalar_cell_term(mesh, c, bundle, geoms.back());
  }
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(bundle.degree + 1, bundle.degree + 1);
  for (int i = 0; i <= bundle.degree; ++i) J(i, bundle.degree - i) = 1.0;

  for (int fi = 0; fi < static_cast<int>(mesh.facets.size()); ++fi) {
    const Facet& f = mesh.facets[fi];
    if (f.tag == FacetTag::Neumann) continue;
    GlobalOperator::FacetTerm term;
    term.facet = fi;
    const bool cart = [&] {
      for (int r = 0; r < f.ncells(); ++r)
        if (geoms[f.cell[r]].kind != MapKind::Cartesian) return false;
      return !(f.ncells() == 2 && f.axis[0] != f.axis[1]);
    }();
    if (!cart) {
      if (d != 2)
        throw std::invalid_argument(
            "dg_poisson_operator: non-Cartesian facets are supported in 2D only");
      term.dense = facet_block_quadrature(mesh, fi, bundle, eta);
      op.facets.push_back(std::move(term));
      continue;
    }
    const int axis = f.axis[0];
    if (f.ncells() == 1) {
      const double mu_e = geoms[f.cell[0]].mu[axis];
      Eigen::MatrixXd E = sipg_facet_dirichlet(bundle.ref, mu_e, eta, f.side[0]);
      KronOperator kop;
      kop.dims.assign(d, bundle.degree + 1);
      KronTerm kt;
      kt.coeff = 1.0;
      for (int a = 0; a < d; ++a) kt.factors.push_back(a == axis ? E : bundle.ref.mass);
      kop.terms.push_back(std::move(kt));
      term.kron_blocks.emplace_back(0, 0, 0, 0, std::move(kop));
    } else {
      const double mu0 = geoms[f.cell[0]].mu[axis];
      const double mu1 = geoms[f.cell[1]].mu[axis];
      const int n1 = bundle.degree + 1;
      const Eigen::MatrixXd E =
          sipg_facet_interior(bundle.ref, mu0, mu1, eta, f.side[0], f.side[1]);
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) {
          KronOperator kop;
          kop.dims.assign(d, n1);
          KronTerm kt;
          kt.coeff = 1.0;
          for (int a = 0; a < d; ++a) {
            if (a == axis)
              kt.factors.push_back(E.block(r * n1, s * n1, n1, n1));
            else if (f.tangential_flip && r != s)
              kt.factors.push_back(bundle.ref.mass * J);
            else
              kt.factors.push_back(bundle.ref.mass);
          }
          kop.terms.push_back(std::move(kt));
          term.kron_blocks.emplace_back(r, s, 0, 0, std::move(kop));
        }
    }
    op.facets.push_back(std::move(term));
  }
  return op;
}

TransformedSystem transformed_dg_poisson(const Discretization& disc, const Bundle1D& bundle,
                                         double eta) {
  if (disc.num_components() != 1 || disc.comps[0].family[0] != Family1D::DG)
    throw std::invalid_argument("transformed_dg_poisson: discontinuous space expected");
  TransformedSystem sys;
  sys.disc = &disc;
  sys.S_axis.resize(1);
  sys.parity_axis.resize(1);
  for (int a = 0; a < disc.dim(); ++a) {
    sys.S_axis[0][a] = bundle.fdm.S;
    sys.parity_axis[0][a] = bundle.fdm.parity;
  }
  sys.inv_multiplicity =
      Eigen::Map<const Eigen::VectorXd>(disc.multiplicity.data(), disc.ndof).cwiseInverse();

  const Mesh& mesh = *disc.mesh;
  const int d = mesh.dim;
  const QuadratureRule rule = gauss_legendre_rule(bundle.degree + 2);
  std::vector<CellGeometry> geoms;
  for (int c = 0; c < mesh.num_cells(); ++c) geoms.push_back(cell_geometry(mesh, c, rule));

  std::vector<Eigen::Triplet<double>> trips;
  auto scatter = [&](const Eigen::SparseMatrix<double>& block, const std::vector<int>& rows,
                     const std::vector<int>& cols) {
    for (int k = 0; k < block.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(block, k); it; ++it)
        trips.emplace_back(rows[it.row()], cols[it.col()], it.value());
  };
  auto kron_axes = [&](const std::array<const Eigen::SparseMatrix<double>*, 3>& fac) {
    Eigen::SparseMatrix<double> out = *fac[d - 1];
    for (int a = d - 2; a >= 0; --a) out = sparse_kron(out, *fac[a]).eval();
    return out;
  };
  // 2D facet block with independent axis placement on the two sides: rows
  // use cell r's layout (normal axis ar), columns cell s's (normal axis as).
  const int n1 = bundle.degree + 1;
  auto facet_block_2d = [n1](const Eigen::SparseMatrix<double>& E,
                             const Eigen::SparseMatrix<double>& T, int ar, int as) {
    std::vector<Eigen::Triplet<double>> t;
    const int row_nstride = (ar == 0) ? 1 : n1;
    const int row_tstride = (ar == 0) ? n1 : 1;
    const int col_nstride = (as == 0) ? 1 : n1;
    const int col_tstride = (as == 0) ? n1 : 1;
    for (int ke = 0; ke < E.outerSize(); ++ke)
      for (Eigen::SparseMatrix<double>::InnerIterator ie(E, ke); ie; ++ie)
        for (int kt = 0; kt < T.outerSize(); ++kt)
          for (Eigen::SparseMatrix<double>::InnerIterator it(T, kt); it; ++it)
            t.emplace_back(ie.row() * row_nstride + it.row() * row_tstride,
                           ie.col() * col_nstride + it.col() * col_tstride,
                           ie.value() * it.value());
    Eigen::SparseMatrix<double> out(n1 * n1, n1 * n1);
    out.setFromTriplets(t.begin(), t.end());
    return out;
  };

  const Eigen::SparseMatrix<double>& At1 = bundle.fdm.A_t;
  const Eigen::SparseMatrix<double>& Bt1 = bundle.fdm.B_t;
  const Eigen::SparseMatrix<double> BtJ = reflected_mass_t(bundle.fdm);

  for (int c = 0; c < mesh.num_cells(); ++c) {
    Eigen::SparseMatrix<double> cellm;
    for (int a = 0; a < d; ++a) {
      std::array<const Eigen::SparseMatrix<double>*, 3> fac{&Bt1, &Bt1, &Bt1};
      fac[a] = &At1;
      Eigen::SparseMatrix<double> term = kron_axes(fac);
      term *= geoms[c].mu[a];
      cellm = (a == 0) ? term : (cellm + term).eval();
    }
    scatter(cellm, disc.comps[0].cell_dofs[c], disc.comps[0].cell_dofs[c]);
  }

  for (int fi = 0; fi < static_cast<int>(mesh.facets.size()); ++fi) {
    const Facet& f = mesh.facets[fi];
    if (f.tag == FacetTag::Neumann) continue;
    if (f.ncells() == 2 && f.axis[0] != f.axis[1] && d == 3)
      throw std::invalid_argument(
          "transformed_dg_poisson: 3D cells must agree on the facet-normal axis");
    if (f.ncells() == 1) {
      const int axis = f.axis[0];
      const double mu_e = geoms[f.cell[0]].mu[axis];
      const Eigen::SparseMatrix<double> E =
          sipg_facet_dirichlet_t(bundle.fdm, mu_e, eta, f.side[0]);
      std::array<const Eigen::SparseMatrix<double>*, 3> fac{&Bt1, &Bt1, &Bt1};
      fac[axis] = &E;
      scatter(kron_axes(fac), disc.comps[0].cell_dofs[f.cell[0]],
              disc.comps[0].cell_dofs[f.cell[0]]);
    } else {
      const double mu0 = geoms[f.cell[0]].mu[f.axis[0]];
      const double mu1 = geoms[f.cell[1]].mu[f.axis[1]];
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) {
          const Eigen::SparseMatrix<double> E = sipg_facet_interior_t(
              bundle.fdm, mu0, mu1, eta, f.side[0], f.side[1], r, s);
          const Eigen::SparseMatrix<double>& T =
              (f.tangential_flip && r != s) ? BtJ : Bt1;
          Eigen::SparseMatrix<double> block;
          if (d == 2) {
            block = facet_block_2d(E, T, f.axis[r], f.axis[s]);
          } else {
            std::array<const Eigen::SparseMatrix<double>*, 3> fac{&T, &T, &T};
            fac[f.axis[0]] = &E;
            block = kron_axes(fac);
          }
          scatter(block, disc.comps[0].cell_dofs[f.cell[r]],
                  disc.comps[0].cell_dofs[f.cell[s]]);
        }
    }
  }

  sys.At.resize(disc.ndof, disc.ndof);
  sys.At.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

Eigen::VectorXd dg_dirichlet_load(const Discretization& disc, const Bundle1D& bundle,
                                  double eta,
                                  const std::function<double(const Eigen::Vector3d&)>& u0) {
  const Mesh& mesh = *disc.mesh;
  const int d = mesh.dim;
  const int n1 = bundle.degree + 1;
  const QuadratureRule rule = gauss_legendre_rule(bundle.degree + 2);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(disc.ndof);
  for (int fi = 0; fi < static_cast<int>(mesh.facets.size()); ++fi) {
    const Facet& f = mesh.facets[fi];
    if (f.ncells() != 1 || f.tag != FacetTag::Dirichlet) continue;
    const int cell = f.cell[0];
    const int axis = f.axis[0];
    const double pen = eta * 2.0 * reciprocal_facet_length(mesh, fi);
    const Eigen::VectorXd vn = trace_row(bundle.ref, f.side[0]);
    const Eigen::VectorXd dn = deriv_row(bundle.ref, f.side[0]);

    // Tensor quadrature over the facet's tangential axes.
    std::vector<int> tang;
    for (int a = 0; a < d; ++a)
      if (a != axis) tang.push_back(a);
    const int nt = static_cast<int>(tang.size());
    int nq = 1;
    for (int k = 0; k < nt; ++k) nq *= rule.size();
    Eigen::VectorXd loc = Eigen::VectorXd::Zero(disc.comps[0].dofs_per_cell);
    for (int q = 0; q < nq; ++q) {
      Eigen::VectorXd xhat(d);
      xhat[axis] = static_cast<double>(f.side[0]);
      int qq = q;
      double wq = 1.0;
      for (int k = 0; k < nt; ++k) {
        xhat[tang[k]] = rule.points[qq % rule.size()];
        wq *= rule.weights[qq % rule.size()];
        qq /= rule.size();
      }
      const Eigen::MatrixXd DF = cell_map_jacobian(mesh, cell, xhat);
      double area;
      Eigen::VectorXd nref = Eigen::VectorXd::Zero(d);
      nref[axis] = static_cast<double>(f.side[0]);
      const Eigen::MatrixXd DFinvT = DF.inverse().transpose();
      if (d == 2) {
        area = DF.col(tang[0]).norm();
      } else {
        Eigen::Vector3d a = DF.col(tang[0]), b = DF.col(tang[1]);
        area = a.cross(b).norm();
      }
      const Eigen::VectorXd normal = (DFinvT * nref).normalized();
      const double g = u0(cell_map(mesh, cell, xhat));
      // Per-axis basis values at the point.
      std::array<Eigen::MatrixXd, 3> V, D;
      for (int a = 0; a < d; ++a) {
        Eigen::VectorXd pt(1);
        pt << xhat[a];
        V[a] = bundle.ref.eval_values(pt);
        D[a] = bundle.ref.eval_derivs(pt);
      }
      for (int j = 0; j < loc.size(); ++j) {
        double vj = 1.0;
        Eigen::VectorXd gref = Eigen::VectorXd::Ones(d);
        int jj = j;
        for (int a = 0; a < d; ++a) {
          const int ja = jj % n1;
          jj /= n1;
          vj *= V[a](0, ja);
          for (int b = 0; b < d; ++b) gref[b] *= (b == a) ? D[a](0, ja) : V[a](0, ja);
        }
        const double ndv = normal.dot(DFinvT * gref);
        loc[j] += wq * area * g * (pen * vj - ndv);
      }
    }
    for (size_t i = 0; i < disc.comps[0].cell_dofs[cell].size(); ++i)
      out[disc.comps[0].cell_dofs[cell][i]] += loc[i];
  }
  return out;
}

}  // namespace fdmstar
