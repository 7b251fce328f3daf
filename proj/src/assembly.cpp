#include "fdmstar/assembly.hpp"

#include <stdexcept>

#include "fdmstar/quadrature.hpp"

namespace fdmstar {

namespace {

Eigen::VectorXd gather(const Eigen::VectorXd& x, const std::vector<int>& dofs) {
  Eigen::VectorXd v(dofs.size());
  for (size_t i = 0; i < dofs.size(); ++i) v[i] = x[dofs[i]];
  return v;
}

void scatter_add(Eigen::VectorXd& y, const std::vector<int>& dofs,
                 const Eigen::VectorXd& v) {
  for (size_t i = 0; i < dofs.size(); ++i) y[dofs[i]] += v[i];
}

std::vector<int> concat_dofs(const Discretization& disc, int cell) {
  std::vector<int> out;
  for (const auto& comp : disc.comps)
    out.insert(out.end(), comp.cell_dofs[cell].begin(), comp.cell_dofs[cell].end());
  return out;
}

std::vector<int> comp_dims(const Discretization& disc, int ci) {
  std::vector<int> dims;
  for (int a = 0; a < disc.dim(); ++a) dims.push_back(disc.comps[ci].degree[a] + 1);
  return dims;
}

}  // namespace

Bundle1D make_bundle(Family1D family, int degree) {
  Bundle1D b;
  b.family = family;
  b.degree = degree;
  const ReferenceInterval gll = reference_operators(degree, BasisKind::GllNodal);
  if (family == Family1D::CG) {
    b.ref = gll;
    b.fdm = fdm_basis(gll);
  } else {
    b.ref = reference_operators(degree, BasisKind::GlNodal);
    b.fdm = to_gl_representation(fdm_basis(gll), gll);
  }
  const QuadratureRule quad = gauss_legendre_rule(degree + 1);
  const Eigen::MatrixXd V = b.ref.eval_values(quad.points);
  const Eigen::MatrixXd D = b.ref.eval_derivs(quad.points);
  b.C = V.transpose() * quad.weights.asDiagonal() * D;
  return b;
}

Eigen::VectorXd GlobalOperator::apply(const Eigen::VectorXd& x) const {
  const Discretization& d = *disc;
  Eigen::VectorXd xp = x;
  d.project_free(xp);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d.ndof);
  for (int c = 0; c < d.mesh->num_cells(); ++c) {
    const CellTerm& term = cells[c];
    if (term.dense.size() > 0) {
      const std::vector<int> dofs = concat_dofs(d, c);
      scatter_add(y, dofs, term.dense * gather(xp, dofs));
    }
    for (const auto& [ci, cj, op] : term.kron_blocks)
      scatter_add(y, d.comps[ci].cell_dofs[c],
                  kron_apply(op, gather(xp, d.comps[cj].cell_dofs[c])));
  }
  for (const auto& fterm : facets) {
    const Facet& f = d.mesh->facets[fterm.facet];
    if (fterm.dense.size() > 0) {
      std::vector<int> dofs = concat_dofs(d, f.cell[0]);
      if (f.ncells() == 2) {
        const std::vector<int> d1 = concat_dofs(d, f.cell[1]);
        dofs.insert(dofs.end(), d1.begin(), d1.end());
      }
      scatter_add(y, dofs, fterm.dense * gather(xp, dofs));
    }
    for (const auto& [r, s, ci, cj, op] : fterm.kron_blocks)
      scatter_add(y, d.comps[ci].cell_dofs[f.cell[r]],
                  kron_apply(op, gather(xp, d.comps[cj].cell_dofs[f.cell[s]])));
  }
  for (int i = 0; i < d.ndof; ++i)
    if (d.constrained[i]) y[i] = x[i];
  return y;
}

SpMat GlobalOperator::assemble() const {
  const Discretization& d = *disc;
  std::vector<Eigen::Triplet<double>> trips;
  auto add_block = [&](const std::vector<int>& rows, const std::vector<int>& cols,
                       const Eigen::MatrixXd& M) {
    for (int i = 0; i < M.rows(); ++i) {
      if (d.constrained[rows[i]]) continue;
      for (int j = 0; j < M.cols(); ++j)
        if (!d.constrained[cols[j]]) trips.emplace_back(rows[i], cols[j], M(i, j));
    }
  };
  for (int c = 0; c < d.mesh->num_cells(); ++c) {
    const CellTerm& term = cells[c];
    if (term.dense.size() > 0) {
      const std::vector<int> dofs = concat_dofs(d, c);
      add_block(dofs, dofs, term.dense);
    }
    for (const auto& [ci, cj, op] : term.kron_blocks)
      add_block(d.comps[ci].cell_dofs[c], d.comps[cj].cell_dofs[c], kron_materialize(op));
  }
  for (const auto& fterm : facets) {
    const Facet& f = d.mesh->facets[fterm.facet];
    if (fterm.dense.size() > 0) {
      std::vector<int> dofs = concat_dofs(d, f.cell[0]);
      if (f.ncells() == 2) {
        const std::vector<int> d1 = concat_dofs(d, f.cell[1]);
        dofs.insert(dofs.end(), d1.begin(), d1.end());
      }
      add_block(dofs, dofs, fterm.dense);
    }
    for (const auto& [r, s, ci, cj, op] : fterm.kron_blocks)
      add_block(d.comps[ci].cell_dofs[f.cell[r]], d.comps[cj].cell_dofs[f.cell[s]],
                kron_materialize(op));
  }
  for (int i = 0; i < d.ndof; ++i)
    if (d.constrained[i]) trips.emplace_back(i, i, 1.0);
  SpMat A(d.ndof, d.ndof);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

Eigen::MatrixXd GlobalOperator::assemble_dense() const { return Eigen::MatrixXd(assemble()); }

std::function<Eigen::VectorXd(const Eigen::VectorXd&)> GlobalOperator::applier() const {
  return [this](const Eigen::VectorXd& x) { return apply(x); };
}

SpMat assemble_global(const GlobalOperator& op) { return op.assemble(); }

void zero_constrained(const Discretization& disc, Eigen::VectorXd& f) {
  disc.project_free(f);
}

KronOperator cell_matrix_cartesian(const ReferenceInterval& ref, const Eigen::VectorXd& mu) {
  const int d = static_cast<int>(mu.size());
  KronOperator op;
  op.dims.assign(d, ref.degree + 1);
  for (int a = 0; a < d; ++a) {
    KronTerm term;
    term.coeff = mu[a];
    for (int b = 0; b < d; ++b) term.factors.push_back(b == a ? ref.stiffness : ref.mass);
    op.terms.push_back(std::move(term));
  }
  return op;
}

namespace {

// Gradient evaluation matrices at tensor quadrature points: D_a applies the
// reference a-derivative, values elsewhere.
Eigen::MatrixXd gradient_matrix(const ReferenceInterval& ref, const QuadratureRule& rule,
                                int d, int axis) {
  const Eigen::MatrixXd V = ref.eval_values(rule.points);
  const Eigen::MatrixXd D = ref.eval_derivs(rule.points);
  Eigen::MatrixXd out = (d - 1 == axis) ? D : V;
  for (int b = d - 2; b >= 0; --b) out = dense_kron(out, b == axis ? D : V).eval();
  return out;
}

KronOperator affine_cell_operator(const Bundle1D& bundle, const Eigen::MatrixXd& G, int d) {
  KronOperator op;
  op.dims.assign(d, bundle.degree + 1);
  const Eigen::MatrixXd& A = bundle.ref.stiffness;
  const Eigen::MatrixXd& B = bundle.ref.mass;
  const Eigen::MatrixXd& C = bundle.C;
  const Eigen::MatrixXd Ct = C.transpose();
  for (int a = 0; a < d; ++a) {
    KronTerm term;
    term.coeff = G(a, a);
    for (int b = 0; b < d; ++b) term.factors.push_back(b == a ? A : B);
    op.terms.push_back(std::move(term));
  }
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      KronTerm t1, t2;
      t1.coeff = t2.coeff = G(a, b);
      for (int k = 0; k < d; ++k) {
        t1.factors.push_back(k == a ? Ct : (k == b ? C : B));
        t2.factors.push_back(k == a ? C : (k == b ? Ct : B));
      }
      op.terms.push_back(std::move(t1));
      op.terms.push_back(std::move(t2));
    }
  return op;
}

}  // namespace

Eigen::MatrixXd cell_matrix_quadrature(const Mesh& mesh, int cell,
                                       const ReferenceInterval& ref) {
  const int d = mesh.dim;
  const QuadratureRule rule = gauss_legendre_rule(ref.degree + 2);
  CellGeometry geom = cell_geometry(mesh, cell, rule);
  std::vector<Eigen::MatrixXd> grads;
  for (int a = 0; a < d; ++a) grads.push_back(gradient_matrix(ref, rule, d, a));
  const int nloc = static_cast<int>(grads[0].cols());
  const int nq = static_cast<int>(grads[0].rows());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nloc, nloc);
  Eigen::VectorXd w(nq);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      for (int q = 0; q < nq; ++q) w[q] = geom.quad_weights[q] * geom.metric[q](a, b);
      A.noalias() += grads[a].transpose() * w.asDiagonal() * grads[b];
    }
  return 0.5 * (A + A.transpose()).eval();
}

GlobalOperator::CellTerm scalar_cell_term(const Mesh& mesh, int cell, const Bundle1D& bundle,
                                          const CellGeometry& geom) {
  GlobalOperator::CellTerm term;
  if (geom.kind == MapKind::Cartesian)
    term.kron_blocks.emplace_back(0, 0, cell_matrix_cartesian(bundle.ref, geom.mu));
  else if (geom.kind == MapKind::Affine)
    term.kron_blocks.emplace_back(0, 0,
                                  affine_cell_operator(bundle, geom.metric[0], mesh.dim));
  else
    term.dense = cell_matrix_quadrature(mesh, cell, bundle.ref);
  return term;
}

GlobalOperator poisson_operator(const Discretization& disc, const Bundle1D& bundle) {
  if (disc.num_components() != 1)
    throw std::invalid_argument("poisson_operator: scalar space expected");
  GlobalOperator op;
  op.disc = &disc;
  const Mesh& mesh = *disc.mesh;
  const QuadratureRule rule = gauss_legendre_rule(bundle.degree + 2);
  op.cells.resize(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellGeometry geom = cell_geometry(mesh, c, rule);
    op.cells[c] = scalar_cell_term(mesh, c, bundle, geom);
  }
  return op;
}

TransformedSystem transformed_poisson(const Discretization& disc, const Bundle1D& bundle,
                                      bool eliminate) {
  if (disc.num_components() != 1)
    throw std::invalid_argument("transformed_poisson: scalar space expected");
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
  const QuadratureRule rule = gauss_legendre_rule(bundle.degree + 2);
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellGeometry geom = cell_geometry(mesh, c, rule);
    Eigen::SparseMatrix<double> cellm;
    for (int a = 0; a < disc.dim(); ++a) {
      Eigen::SparseMatrix<double> term = bundle.fdm.B_t;
      if (a == disc.dim() - 1) term = bundle.fdm.A_t;
      for (int b = disc.dim() - 2; b >= 0; --b)
        term = sparse_kron(term, b == a ? bundle.fdm.A_t : bundle.fdm.B_t).eval();
      term *= geom.mu[a];
      cellm = (a == 0) ? term : (cellm + term).eval();
    }
    const auto& modes = disc.comps[0].cell_modes[c];
    const Eigen::VectorXd sgn = sys.mode_signs(0, c);
    for (int k = 0; k < cellm.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(cellm, k); it; ++it) {
        const bool drop = eliminate && (disc.constrained[modes[it.row()]] ||
                                        disc.constrained[modes[it.col()]]);
        if (!drop)
          trips.emplace_back(modes[it.row()], modes[it.col()],
                             sgn[it.row()] * sgn[it.col()] * it.value());
      }
  }
  if (eliminate)
    for (int i = 0; i < disc.ndof; ++i)
      if (disc.constrained[i]) trips.emplace_back(i, i, 1.0);
  sys.At.resize(disc.ndof, disc.ndof);
  sys.At.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

Eigen::VectorXd TransformedSystem::mode_signs(int ci, int cell) const {
  const auto& comp = disc->comps[ci];
  Eigen::VectorXd s = Eigen::VectorXd::Ones(comp.dofs_per_cell);
  const auto& flips = comp.cell_mode_flip_axis[cell];
  for (int lat = 0; lat < comp.dofs_per_cell; ++lat) {
    if (flips[lat] < 0) continue;
    const int axis = flips[lat];
    int idx = lat;
    for (int a = 0; a < axis; ++a) idx /= comp.degree[a] + 1;
    idx %= comp.degree[axis] + 1;
    s[lat] = parity_axis[ci][axis][idx];
  }
  return s;
}

Eigen::VectorXd TransformedSystem::apply_S(const Eigen::VectorXd& modes) const {
  const Discretization& d = *disc;
  Eigen::VectorXd x = modes;
  d.project_free(x);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d.ndof);
  for (int c = 0; c < d.mesh->num_cells(); ++c)
    for (int ci = 0; ci < d.num_components(); ++ci) {
      Eigen::VectorXd v =
          gather(x, d.comps[ci].cell_modes[c]).cwiseProduct(mode_signs(ci, c));
      std::vector<int> dims = comp_dims(d, ci);
      for (int a = 0; a < d.dim(); ++a) v = apply_axis(S_axis[ci][a], v, dims, a);
      scatter_add(y, d.comps[ci].cell_dofs[c], v);
    }
  y.array() *= inv_multiplicity.array();
  d.project_free(y);
  return y;
}

Eigen::VectorXd TransformedSystem::apply_St(const Eigen::VectorXd& nodal) const {
  const Discretization& d = *disc;
  Eigen::VectorXd x = nodal.cwiseProduct(inv_multiplicity);
  d.project_free(x);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d.ndof);
  for (int c = 0; c < d.mesh->num_cells(); ++c)
    for (int ci = 0; ci < d.num_components(); ++ci) {
      Eigen::VectorXd v = gather(x, d.comps[ci].cell_dofs[c]);
      std::vector<int> dims = comp_dims(d, ci);
      for (int a = 0; a < d.dim(); ++a)
        v = apply_axis(S_axis[ci][a].transpose(), v, dims, a);
      scatter_add(y, d.comps[ci].cell_modes[c],
                  v.cwiseProduct(mode_signs(ci, c)));
    }
  d.project_free(y);
  return y;
}

Eigen::VectorXd load_vector(const Discretization& disc, const Bundle1D& bundle,
                            const std::function<double(const Eigen::Vector3d&)>& f) {
  const Mesh& mesh = *disc.mesh;
  const int d = mesh.dim;
  const QuadratureRule rule = gauss_legendre_rule(bundle.degree + 2);
  const Eigen::MatrixXd Vt = bundle.ref.eval_values(rule.points).transpose();
  const int nq1 = rule.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(disc.ndof);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellGeometry geom = cell_geometry(mesh, c, rule);
    const int nq = static_cast<int>(geom.dets.size());
    Eigen::VectorXd g(nq);
    Eigen::VectorXd xhat(d);
    for (int q = 0; q < nq; ++q) {
      int qq = q;
      for (int a = 0; a < d; ++a) {
        xhat[a] = rule.points[qq % nq1];
        qq /= nq1;
      }
      g[q] = geom.quad_weights[q] * geom.dets[q] * f(cell_map(mesh, c, xhat));
    }
    std::vector<int> dims(d, nq1);
    for (int a = 0; a < d; ++a) {
      g = apply_axis(Vt, g, dims, a);
      dims[a] = bundle.degree + 1;
    }
    scatter_add(out, disc.comps[0].cell_dofs[c], g);
  }
  return out;
}

}  // namespace fdmstar
