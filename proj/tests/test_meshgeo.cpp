#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "fdmstar/geometry.hpp"
#include "fdmstar/mesh.hpp"

using namespace fdmstar;

namespace {

int count_boundary(const Mesh& m) {
  int n = 0;
  for (const auto& f : m.facets) n += f.ncells() == 1;
  return n;
}

int count_interior(const Mesh& m) {
  int n = 0;
  for (const auto& f : m.facets) n += f.ncells() == 2;
  return n;
}

double total_measure(const Mesh& m) {
  double s = 0;
  for (int c = 0; c < m.num_cells(); ++c) s += cell_measure(m, c);
  return s;
}

}  // namespace

TEST_CASE("cartesian_mesh: counts and facet identities") {
  Mesh one = cartesian_mesh(2, {1, 1}, {1, 1});
  CHECK(one.num_cells() == 1);
  CHECK(one.num_vertices() == 4);
  CHECK(count_boundary(one) == 4);
  CHECK(count_interior(one) == 0);

  Mesh m = cartesian_mesh(2, {8, 8}, {1, 1});
  CHECK(m.num_cells() == 64);
  CHECK(m.num_vertices() == 81);
  int four_cell_stars = 0;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.vertex_cells[v].size() == 4) ++four_cell_stars;
  CHECK(four_cell_stars == 49);
  CHECK(2 * count_interior(m) + count_boundary(m) == 64 * 4);
  for (const auto& f : m.facets) CHECK(!f.tangential_flip);

  Mesh m3 = cartesian_mesh(3, {2, 2, 2}, {1, 1, 1});
  int interior_verts = 0;
  for (int v = 0; v < m3.num_vertices(); ++v)
    if (m3.vertex_cells[v].size() == 8) ++interior_verts;
  CHECK(interior_verts == 1);
  CHECK(2 * count_interior(m3) + count_boundary(m3) == 8 * 6);

  CHECK_THROWS_AS(cartesian_mesh(2, {1, 1}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("parallelogram_mesh: right angle degenerates to Cartesian") {
  Mesh m = parallelogram_mesh(2, M_PI / 2);
  const QuadratureRule rule = gauss_legendre_rule(3);
  for (int c = 0; c < m.num_cells(); ++c)
    CHECK(cell_geometry(m, c, rule).kind == MapKind::Cartesian);
  CHECK_THROWS_AS(parallelogram_mesh(2, 0.0), std::invalid_argument);
}

TEST_CASE("parallelogram metric: scaled spectrum is 1 -+ |cos theta|") {
  const QuadratureRule rule = gauss_legendre_rule(3);
  for (double theta : {2 * M_PI / 5, 2 * M_PI / 6, 2 * M_PI / 8}) {
    Mesh m = parallelogram_mesh(3, theta);
    for (int c : {0, 4, 8}) {
      CellGeometry g = cell_geometry(m, c, rule);
      CHECK(g.kind == MapKind::Affine);
      Eigen::MatrixXd G = g.metric[0].topLeftCorner(2, 2);
      Eigen::VectorXd mu = surrogate_coeffs(g);
      Eigen::MatrixXd scaled =
          mu.cwiseInverse().cwiseSqrt().asDiagonal() * G *
          mu.cwiseInverse().cwiseSqrt().asDiagonal();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled);
      CHECK(es.eigenvalues()[0] ==
            doctest::Approx(1.0 - std::abs(std::cos(theta))).epsilon(1e-12));
      CHECK(es.eigenvalues()[1] ==
            doctest::Approx(1.0 + std::abs(std::cos(theta))).epsilon(1e-12));
    }
  }
}

TEST_CASE("surrogate_coeffs: Cartesian closed form and parallelogram value") {
  const QuadratureRule rule = gauss_legendre_rule(3);
  Mesh ani = cartesian_mesh(2, {1, 1}, {1.0, 0.5});
  CellGeometry g = cell_geometry(ani, 0, rule);
  CHECK(g.kind == MapKind::Cartesian);
  CHECK(g.lengths[0] == doctest::Approx(0.5));
  CHECK(g.lengths[1] == doctest::Approx(0.25));
  CHECK(g.mu[0] == doctest::Approx(0.5));
  CHECK(g.mu[1] == doctest::Approx(2.0));

  Mesh ref = cartesian_mesh(2, {1, 1}, {2.0, 2.0});  // reference-sized cell
  CellGeometry gr = cell_geometry(ref, 0, rule);
  CHECK(gr.mu[0] == doctest::Approx(1.0));
  CHECK(gr.mu[1] == doctest::Approx(1.0));
  CHECK((gr.metric[0] - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);

  Mesh unit = cartesian_mesh(2, {1, 1}, {1.0, 1.0});
  CellGeometry gu = cell_geometry(unit, 0, rule);
  CHECK((gu.jacobians[0] - 0.5 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((gu.metric[0] - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);

  Mesh para = parallelogram_mesh(1, 2 * M_PI / 6);
  CellGeometry gp = cell_geometry(para, 0, rule);
  CHECK(gp.mu[0] == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(gp.mu[1] == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-13));
  // Closed-form off-diagonal entry -cos(theta)/|sin(theta)|.
  CHECK(gp.metric[0](0, 1) ==
        doctest::Approx(-std::cos(2 * M_PI / 6) / std::sin(2 * M_PI / 6)).epsilon(1e-13));
}

TEST_CASE("refine_uniform: counts, measure, affine children") {
  Mesh one = cartesian_mesh(2, {1, 1}, {1, 1});
  Mesh r = refine_uniform(one);
  CHECK(r.num_cells() == 4);
  CHECK(r.num_vertices() == 9);

  Mesh m = cartesian_mesh(2, {8, 8}, {1, 1});
  Mesh m2 = refine_uniform(refine_uniform(m));
  CHECK(m2.num_cells() == 32 * 32);
  const QuadratureRule rule = gauss_legendre_rule(2);
  CHECK(cell_geometry(m2, 100, rule).kind == MapKind::Cartesian);

  Mesh para = parallelogram_mesh(2, 2 * M_PI / 6);
  Mesh rp = refine_uniform(para);
  CellGeometry g0 = cell_geometry(para, 0, rule);
  for (int c = 0; c < rp.num_cells(); ++c) {
    CellGeometry g = cell_geometry(rp, c, rule);
    CHECK(g.kind == MapKind::Affine);
    CHECK((g.metric[0] - g0.metric[0]).cwiseAbs().maxCoeff() < 1e-12);
  }

  Mesh u = unstructured_mesh();
  CHECK(std::abs(total_measure(refine_uniform(u)) - total_measure(u)) < 1e-12);

  Mesh m3 = refine_uniform(cartesian_mesh(3, {2, 2, 2}, {1, 1, 1}));
  CHECK(m3.num_cells() == 64);
  CHECK(std::abs(total_measure(m3) - 1.0) < 1e-12);
}

TEST_CASE("refine_uniform: boundary tags inherited") {
  Mesh m = cartesian_mesh(2, {2, 2}, {1, 1});
  tag_boundary(m, [](const Eigen::Vector3d& x) { return std::abs(x[0]) < 1e-12; },
               FacetTag::Neumann);
  Mesh r = refine_uniform(m);
  for (const auto& f : r.facets) {
    if (f.ncells() != 1) continue;
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (int v : f.vertices) c += r.vertices[v] / 2.0;
    if (std::abs(c[0]) < 1e-12)
      CHECK(f.tag == FacetTag::Neumann);
    else
      CHECK(f.tag == FacetTag::Dirichlet);
  }
}

TEST_CASE("vertex_star: interior, boundary, pentagon center") {
  Mesh m = cartesian_mesh(2, {4, 4}, {1, 1});
  int interior_v = -1, edge_v = -1;
  for (int v = 0; v < m.num_vertices(); ++v) {
    const auto& x = m.vertices[v];
    if (interior_v < 0 && m.vertex_cells[v].size() == 4) interior_v = v;
    const bool on_bnd = std::abs(x[0]) < 1e-12;
    const bool corner = on_bnd && (std::abs(x[1]) < 1e-12 || std::abs(x[1] - 1) < 1e-12);
    if (edge_v < 0 && on_bnd && !corner) edge_v = v;
  }
  PatchTopology pi = vertex_star(m, interior_v);
  CHECK(pi.cells.size() == 4);
  CHECK(pi.interior_facets.size() == 4);
  PatchTopology pb = vertex_star(m, edge_v);
  CHECK(pb.cells.size() == 2);
  CHECK(pb.interior_facets.size() == 1);

  Mesh penta = pentagon_mesh();
  int center = -1;
  for (int v = 0; v < penta.num_vertices(); ++v)
    if (penta.vertex_cells[v].size() == 5) center = v;
  REQUIRE(center >= 0);
  CHECK(vertex_star(penta, center).cells.size() == 5);
  CHECK(vertex_star(penta, center).interior_facets.size() == 5);

  Mesh tri = triquad_mesh();
  int tcenter = -1;
  for (int v = 0; v < tri.num_vertices(); ++v)
    if (tri.vertex_cells[v].size() == 3) tcenter = v;
  CHECK(tcenter >= 0);

  Mesh u = unstructured_mesh();
  std::set<size_t> valences;
  for (int v = 0; v < u.num_vertices(); ++v) {
    bool boundary = false;
    for (int f = 0; f < static_cast<int>(u.facets.size()); ++f)
      if (u.facets[f].ncells() == 1)
        for (int w : u.facets[f].vertices) boundary |= (w == v);
    if (!boundary) valences.insert(u.vertex_cells[v].size());
  }
  CHECK(valences == std::set<size_t>({3, 4, 5}));
}

TEST_CASE("mesh io: roundtrip and validation errors") {
  Mesh m = cartesian_mesh(2, {3, 2}, {1.5, 0.7});
  tag_boundary(m, [](const Eigen::Vector3d& x) { return x[0] > 1.5 - 1e-12; },
               FacetTag::Neumann);
  const std::string path = "roundtrip_mesh.json";
  save_mesh(m, path);
  Mesh l = load_mesh(path);
  REQUIRE(l.num_vertices() == m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v)
    CHECK((l.vertices[v] - m.vertices[v]).norm() == 0.0);
  CHECK(l.cells == m.cells);
  REQUIRE(l.facets.size() == m.facets.size());
  for (size_t f = 0; f < m.facets.size(); ++f) CHECK(l.facets[f].tag == m.facets[f].tag);
  std::remove(path.c_str());

  const std::string bad = "bad_mesh.json";
  {
    std::ofstream os(bad);
    os << R"({"dim":2,"vertices":[[0,0],[1,0],[0,1],[1,1]],"cells":[[0,1,2,99]]})";
  }
  try {
    load_mesh(bad);
    CHECK(false);
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("cell 0") != std::string::npos);
    CHECK(std::string(e.what()).find("99") != std::string::npos);
  }
  std::remove(bad.c_str());
}

TEST_CASE("reciprocal_facet_length: ratios on Cartesian meshes") {
  Mesh m = cartesian_mesh(2, {8, 8}, {1, 1});
  for (int f = 0; f < static_cast<int>(m.facets.size()); ++f)
    CHECK(reciprocal_facet_length(m, f) == doctest::Approx(8.0).epsilon(1e-12));

  Mesh ani = cartesian_mesh(2, {1, 1}, {1.0, 0.25});
  for (int f = 0; f < static_cast<int>(ani.facets.size()); ++f) {
    const Facet& fa = ani.facets[f];
    if (fa.axis[0] == 1)  // long edges, |e| = 1
      CHECK(reciprocal_facet_length(ani, f) == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("ring meshes have flipped facets somewhere") {
  Mesh penta = pentagon_mesh();
  int flips = 0;
  for (const auto& f : penta.facets) flips += f.tangential_flip;
  CHECK(flips >= 1);  // an odd ring cannot be globally consistent
}
