#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "fdmstar/assembly.hpp"
#include "fdmstar/cholesky.hpp"

using namespace fdmstar;

namespace {

Eigen::VectorXd random_free(const Discretization& disc, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1, 1);
  Eigen::VectorXd x(disc.ndof);
  for (auto& c : x) c = uni(rng);
  Eigen::VectorXd xp = x;
  disc.project_free(xp);
  return xp;
}

}  // namespace

TEST_CASE("cell_matrix_cartesian: interval scaling and unit square") {
  auto ref = reference_operators(3, BasisKind::GllNodal);
  // Interval of physical length 1: half-length 1/2, coefficient 1/L = 2.
  Eigen::VectorXd mu1(1);
  mu1 << 2.0;
  Eigen::MatrixXd A1 = kron_materialize(cell_matrix_cartesian(ref, mu1));
  CHECK((A1 - 2.0 * ref.stiffness).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::VectorXd mu2(2);
  mu2 << 1.0, 1.0;
  Eigen::MatrixXd A2 = kron_materialize(cell_matrix_cartesian(ref, mu2));
  Eigen::MatrixXd expect =
      dense_kron(ref.mass, ref.stiffness) + dense_kron(ref.stiffness, ref.mass);
  CHECK((A2 - expect).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("1D direct stiffness summation: classic 3-point stencil") {
  auto ref = reference_operators(1, BasisKind::GllNodal);
  const double h = 0.25;
  Eigen::MatrixXd AK = (2.0 / h) * ref.stiffness;  // 1/L with L = h/2
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
  A.block(0, 0, 2, 2) += AK;
  A.block(1, 1, 2, 2) += AK;
  Eigen::MatrixXd expect(3, 3);
  expect << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((A - expect / h).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("cell_matrix_quadrature: matches the separable path on Cartesian cells") {
  for (int p : {2, 5}) {
    auto bundle = make_bundle(Family1D::CG, p);
    Mesh m = cartesian_mesh(2, {2, 1}, {1.0, 0.5});
    const QuadratureRule rule = gauss_legendre_rule(p + 2);
    for (int c = 0; c < m.num_cells(); ++c) {
      CellGeometry geom = cell_geometry(m, c, rule);
      Eigen::MatrixXd quad = cell_matrix_quadrature(m, c, bundle.ref);
      Eigen::MatrixXd kron = kron_materialize(cell_matrix_cartesian(bundle.ref, geom.mu));
      CHECK((quad - kron).cwiseAbs().maxCoeff() < 1e-12 * quad.cwiseAbs().maxCoeff());
    }
    // Right-angle parallelogram reduces to the Cartesian values.
    Mesh sq = parallelogram_mesh(1, M_PI / 2);
    CellGeometry geom = cell_geometry(sq, 0, rule);
    Eigen::MatrixXd quad = cell_matrix_quadrature(sq, 0, bundle.ref);
    Eigen::MatrixXd kron = kron_materialize(cell_matrix_cartesian(bundle.ref, geom.mu));
    CHECK((quad - kron).cwiseAbs().maxCoeff() < 1e-12 * quad.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("affine cells: Kronecker path with cross term matches quadrature") {
  auto bundle = make_bundle(Family1D::CG, 4);
  Mesh para = parallelogram_mesh(2, 2 * M_PI / 6);
  Discretization disc = q_space(para, 4);
  GlobalOperator op = poisson_operator(disc, bundle);
  for (int c = 0; c < para.num_cells(); ++c) {
    REQUIRE(op.cells[c].kron_blocks.size() == 1);
    Eigen::MatrixXd kron = kron_materialize(std::get<2>(op.cells[c].kron_blocks[0]));
    Eigen::MatrixXd quad = cell_matrix_quadrature(para, c, bundle.ref);
    CHECK((kron - quad).cwiseAbs().maxCoeff() < 1e-11 * quad.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("constants lie in the kernel of every Poisson cell matrix") {
  auto bundle = make_bundle(Family1D::CG, 3);
  Mesh penta = pentagon_mesh();
  for (int c = 0; c < penta.num_cells(); ++c) {
    Eigen::MatrixXd A = cell_matrix_quadrature(penta, c, bundle.ref);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(A.cols());
    CHECK((A * ones).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("q_space: DOF counts and sharing") {
  Mesh m = cartesian_mesh(2, {2, 2}, {1, 1});
  Discretization disc = q_space(m, 3);
  CHECK(disc.ndof == 49);  // (2p+1)^2 on a 2x2 mesh
  // Multiplicities: center vertex shared by 4 cells.
  int mult4 = 0;
  for (int d = 0; d < disc.ndof; ++d) mult4 += disc.multiplicity[d] == 4.0;
  CHECK(mult4 == 1);
  // Constrained count: boundary nodes of the (2p+1)^2 lattice.
  CHECK(disc.num_free() == 5 * 5);

  Mesh m3 = cartesian_mesh(3, {2, 2, 2}, {1, 1, 1});
  Discretization d3 = q_space(m3, 2);
  CHECK(d3.ndof == 125);
  CHECK(d3.num_free() == 27);

  Discretization dg = dq_space(m, 3);
  CHECK(dg.ndof == 4 * 16);
  CHECK(dg.num_free() == dg.ndof);
}

TEST_CASE("CG assembly is bitwise symmetric and matches a dense oracle") {
  auto bundle = make_bundle(Family1D::CG, 3);
  Mesh m = cartesian_mesh(2, {2, 2}, {1, 1});
  Discretization disc = q_space(m, 3);
  GlobalOperator op = poisson_operator(disc, bundle);
  SpMat A = op.assemble();
  Eigen::MatrixXd Ad(A);
  CHECK((Ad - Ad.transpose()).cwiseAbs().maxCoeff() == 0.0);

  // Operator apply agrees with the assembled matrix.
  Eigen::VectorXd x = random_free(disc, 42);
  CHECK((op.apply(x) - spmv(A, x)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single cell, full Dirichlet, p=2: one-DOF reduced system") {
  auto bundle = make_bundle(Family1D::CG, 2);
  Mesh m = cartesian_mesh(2, {1, 1}, {1, 1});
  Discretization disc = q_space(m, 2);
  CHECK(disc.num_free() == 1);
  GlobalOperator op = poisson_operator(disc, bundle);
  Eigen::MatrixXd A = op.assemble_dense();
  Eigen::MatrixXd cellm = cell_matrix_quadrature(m, 0, bundle.ref);
  int free_dof = -1;
  for (int d = 0; d < disc.ndof; ++d)
    if (!disc.constrained[d]) free_dof = d;
  int lat = -1;
  for (int l = 0; l < 9; ++l)
    if (disc.comps[0].cell_dofs[0][l] == free_dof) lat = l;
  CHECK(A(free_dof, free_dof) == doctest::Approx(cellm(lat, lat)).epsilon(1e-13));
}

TEST_CASE("transformed system: structural stencils") {
  auto bundle = make_bundle(Family1D::CG, 4);
  Mesh m = cartesian_mesh(2, {2, 2}, {1, 1});
  Discretization disc = q_space(m, 4);
  TransformedSystem sys = transformed_poisson(disc, bundle, /*eliminate=*/false);
  for (int dof = 0; dof < disc.ndof; ++dof) {
    if (disc.labels[dof].cls != DofClass::Interior) continue;
    int nnz = 0;
    for (SpMat::InnerIterator it(sys.At, dof); it; ++it) ++nnz;
    CHECK(nnz == 5);  // 2d+1
  }

  // Vertex-star patch: d+1 nonzeros on interior rows.
  TransformedSystem esys = transformed_poisson(disc, bundle);
  int center = -1;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.vertex_cells[v].size() == 4) center = v;
  std::vector<int> patch = disc.star_dofs(center);
  CHECK(static_cast<int>(patch.size()) == 7 * 7);  // (2p-1)^2
  SpMat Aj = extract_submatrix(esys.At, patch);
  for (size_t k = 0; k < patch.size(); ++k) {
    if (disc.labels[patch[k]].cls != DofClass::Interior) continue;
    int nnz = 0;
    for (SpMat::InnerIterator it(Aj, static_cast<int>(k)); it; ++it) ++nnz;
    CHECK(nnz == 3);  // d+1
  }
}

TEST_CASE("transformed system: S-transpose adjoint and Cartesian exactness") {
  auto bundle = make_bundle(Family1D::CG, 3);
  Mesh m = cartesian_mesh(2, {2, 2}, {1, 1});
  Discretization disc = q_space(m, 3);
  GlobalOperator op = poisson_operator(disc, bundle);
  TransformedSystem sys = transformed_poisson(disc, bundle);

  Eigen::VectorXd x = random_free(disc, 1);
  Eigen::VectorXd y = random_free(disc, 2);
  CHECK(y.dot(sys.apply_S(x)) == doctest::Approx(sys.apply_St(y).dot(x)).epsilon(1e-12));

  // A^{-1} = S At^{-1} S^T against a dense direct solve.
  Eigen::VectorXd b = random_free(disc, 3);
  Eigen::MatrixXd Ad = op.assemble_dense();
  Eigen::VectorXd x_direct = Ad.ldlt().solve(b);
  auto F = cholesky(sys.At, natural_ordering(disc.ndof));
  Eigen::VectorXd x_fdm = sys.apply_S(F.solve(sys.apply_St(b)));
  CHECK((x_fdm - x_direct).norm() / x_direct.norm() < 1e-10);

  // Same check on an anisotropic Cartesian mesh at p=5.
  auto bundle5 = make_bundle(Family1D::CG, 5);
  Mesh ani = cartesian_mesh(2, {2, 2}, {2.0, 0.5});
  Discretization disc5 = q_space(ani, 5);
  GlobalOperator op5 = poisson_operator(disc5, bundle5);
  TransformedSystem sys5 = transformed_poisson(disc5, bundle5);
  Eigen::VectorXd b5 = random_free(disc5, 4);
  Eigen::VectorXd x5 = Eigen::MatrixXd(op5.assemble_dense()).ldlt().solve(b5);
  auto F5 = cholesky(sys5.At, natural_ordering(disc5.ndof));
  Eigen::VectorXd xf5 = sys5.apply_S(F5.solve(sys5.apply_St(b5)));
  CHECK((xf5 - x5).norm() / x5.norm() < 1e-10);
}

TEST_CASE("load_vector: partition of unity on one cell") {
  auto bundle = make_bundle(Family1D::CG, 1);
  Mesh m = cartesian_mesh(2, {1, 1}, {1, 1});
  Discretization disc = q_space(m, 1);
  Eigen::VectorXd f =
      load_vector(disc, bundle, [](const Eigen::Vector3d&) { return 1.0; });
  for (int d = 0; d < 4; ++d) CHECK(f[d] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("3D Cartesian: transformed solve equals dense solve") {
  auto bundle = make_bundle(Family1D::CG, 2);
  Mesh m = cartesian_mesh(3, {2, 2, 2}, {1, 1, 1});
  Discretization disc = q_space(m, 2);
  GlobalOperator op = poisson_operator(disc, bundle);
  TransformedSystem sys = transformed_poisson(disc, bundle);
  Eigen::VectorXd b = random_free(disc, 9);
  Eigen::VectorXd xd = Eigen::MatrixXd(op.assemble_dense()).ldlt().solve(b);
  auto F = cholesky(sys.At, natural_ordering(disc.ndof));
  Eigen::VectorXd xf = sys.apply_S(F.solve(sys.apply_St(b)));
  CHECK((xf - xd).norm() / xd.norm() < 1e-10);
}
