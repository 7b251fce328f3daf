#include "fdmstar/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "fdmstar/quadrature.hpp"

namespace fdmstar {

std::vector<int> Mesh::local_facet_corners(int dim, int axis, int side) {
  std::vector<int> out;
  const int fixed_bit = (side > 0) ? (1 << axis) : 0;
  const int nrem = 1 << (dim - 1);
  for (int m = 0; m < nrem; ++m) {
    int corner = fixed_bit;
    int mm = m;
    for (int a = 0; a < dim; ++a) {
      if (a == axis) continue;
      if (mm & 1) corner |= 1 << a;
      mm >>= 1;
    }
    out.push_back(corner);
  }
  return out;
}

void Mesh::finalize() {
  facets.clear();
  std::map<std::vector<int>, int> lookup;
  for (int c = 0; c < num_cells(); ++c) {
    if (static_cast<int>(cells[c].size()) != corners_per_cell())
      throw std::invalid_argument("mesh: cell " + std::to_string(c) +
                                  " has wrong corner count");
    for (int v : cells[c])
      if (v < 0 || v >= num_vertices())
        throw std::invalid_argument("mesh: cell " + std::to_string(c) +
                                    " references vertex " + std::to_string(v) +
                                    " (mesh has " + std::to_string(num_vertices()) +
                                    " vertices)");
    for (int axis = 0; axis < dim; ++axis)
      for (int side : {-1, 1}) {
        std::vector<int> corners;
        for (int lc : local_facet_corners(dim, axis, side))
          corners.push_back(cells[c][lc]);
        std::vector<int> key = corners;
        std::sort(key.begin(), key.end());
        auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(facets.size()));
        if (inserted) {
          Facet f;
          f.cell[0] = c;
          f.axis[0] = axis;
          f.side[0] = side;
          f.vertices = corners;
          facets.push_back(std::move(f));
        } else {
          Facet& f = facets[it->second];
          if (f.cell[1] >= 0)
            throw std::invalid_argument("mesh: facet shared by more than two cells");
          f.cell[1] = c;
          f.axis[1] = axis;
          f.side[1] = side;
          if (dim == 2) {
            if (corners == f.vertices)
              f.tangential_flip = false;
            else if (corners[0] == f.vertices[1] && corners[1] == f.vertices[0])
              f.tangential_flip = true;
            else
              throw std::invalid_argument("mesh: non-conforming facet");
          } else {
            f.oriented = (corners == f.vertices);
          }
        }
      }
  }
  for (auto& f : facets)
    if (f.ncells() == 1 && f.tag == FacetTag::Interior) f.tag = FacetTag::Dirichlet;

  vertex_cells.assign(num_vertices(), {});
  for (int c = 0; c < num_cells(); ++c)
    for (int v : cells[c]) vertex_cells[v].push_back(c);
  for (auto& vc : vertex_cells) {
    std::sort(vc.begin(), vc.end());
    vc.erase(std::unique(vc.begin(), vc.end()), vc.end());
  }
}

int Mesh::find_facet(int cell, int axis, int side) const {
  for (int fi = 0; fi < static_cast<int>(facets.size()); ++fi) {
    const Facet& f = facets[fi];
    for (int r = 0; r < f.ncells(); ++r)
      if (f.cell[r] == cell && f.axis[r] == axis && f.side[r] == side) return fi;
  }
  return -1;
}

Mesh cartesian_mesh(int dim, const std::vector<int>& counts,
                    const std::vector<double>& lengths) {
  if (dim < 2 || dim > 3) throw std::invalid_argument("cartesian_mesh: dim must be 2 or 3");
  if (static_cast<int>(counts.size()) != dim || static_cast<int>(lengths.size()) != dim)
    throw std::invalid_argument("cartesian_mesh: counts/lengths size mismatch");
  for (int a = 0; a < dim; ++a) {
    if (counts[a] < 1) throw std::invalid_argument("cartesian_mesh: counts must be >= 1");
    if (!(lengths[a] > 0)) throw std::invalid_argument("cartesian_mesh: extents must be positive");
  }
  Mesh mesh;
  mesh.dim = dim;
  std::vector<int> np(3, 1);
  for (int a = 0; a < dim; ++a) np[a] = counts[a] + 1;
  auto vid = [&](int i, int j, int k) { return i + np[0] * (j + np[1] * k); };
  for (int k = 0; k < np[2]; ++k)
    for (int j = 0; j < np[1]; ++j)
      for (int i = 0; i < np[0]; ++i) {
        Eigen::Vector3d v(0, 0, 0);
        v[0] = lengths[0] * i / counts[0];
        v[1] = lengths[1] * j / counts[1];
        if (dim == 3) v[2] = lengths[2] * k / counts[2];
        mesh.vertices.push_back(v);
      }
  const int nz = (dim == 3) ? counts[2] : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < counts[1]; ++j)
      for (int i = 0; i < counts[0]; ++i) {
        std::vector<int> c;
        for (int b = 0; b < (1 << dim); ++b)
          c.push_back(vid(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1)));
        mesh.cells.push_back(c);
      }
  mesh.finalize();
  return mesh;
}

Mesh parallelogram_mesh(int n, double theta) {
  if (n < 1) throw std::invalid_argument("parallelogram_mesh: n must be >= 1");
  if (!(theta > 0.0) || !(theta < M_PI) || std::abs(std::sin(theta)) < 1e-12)
    throw std::invalid_argument("parallelogram_mesh: degenerate angle");
  Mesh mesh;
  mesh.dim = 2;
  const Eigen::Vector3d a(1, 0, 0), b(std::cos(theta), std::sin(theta), 0);
  auto vid = [&](int i, int j) { return i + (n + 1) * j; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) mesh.vertices.push_back(i * a + j * b);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      mesh.cells.push_back({vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)});
  mesh.finalize();
  return mesh;
}

namespace {

// Bilinear map determinant at the reference center; used to orient
// hand-built quads consistently (positive Jacobian).
double center_det2d(const Mesh& mesh, const std::vector<int>& c) {
  const Eigen::Vector3d dx =
      0.25 * (mesh.vertices[c[1]] - mesh.vertices[c[0]] + mesh.vertices[c[3]] - mesh.vertices[c[2]]);
  const Eigen::Vector3d dy =
      0.25 * (mesh.vertices[c[2]] - mesh.vertices[c[0]] + mesh.vertices[c[3]] - mesh.vertices[c[1]]);
  return dx[0] * dy[1] - dx[1] * dy[0];
}

void orient_cells_2d(Mesh& mesh) {
  for (auto& c : mesh.cells)
    if (center_det2d(mesh, c) < 0) std::swap(c[1], c[2]);  // transpose axes
}

Mesh ring_mesh(const std::vector<Eigen::Vector3d>& poly) {
  const int n = static_cast<int>(poly.size());
  Mesh mesh;
  mesh.dim = 2;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  for (const auto& p : poly) center += p / n;
  for (const auto& p : poly) mesh.vertices.push_back(p);                    // 0..n-1
  for (int k = 0; k < n; ++k)                                               // n..2n-1
    mesh.vertices.push_back(0.5 * (poly[k] + poly[(k + 1) % n]));
  mesh.vertices.push_back(center);                                          // 2n
  for (int k = 0; k < n; ++k) {
    const int mprev = n + (k + n - 1) % n;
    mesh.cells.push_back({mprev, k, 2 * n, n + k});
  }
  orient_cells_2d(mesh);
  mesh.finalize();
  return mesh;
}

std::vector<Eigen::Vector3d> regular_polygon(int n, const Eigen::Vector3d& p0, bool above) {
  // Unit edge lengths, first edge from p0 along +x; interior above or below.
  std::vector<Eigen::Vector3d> poly{p0};
  double angle = 0.0;
  const double turn = 2.0 * M_PI / n * (above ? 1.0 : -1.0);
  for (int k = 0; k + 1 < n; ++k) {
    poly.push_back(poly.back() + Eigen::Vector3d(std::cos(angle), std::sin(angle), 0));
    angle += turn;
  }
  return poly;
}

}  // namespace

Mesh pentagon_mesh() { return ring_mesh(regular_polygon(5, {0, 0, 0}, true)); }

Mesh triquad_mesh() { return ring_mesh(regular_polygon(3, {0, 0, 0}, true)); }

Mesh unstructured_mesh() {
  Mesh penta = ring_mesh(regular_polygon(5, {0, 0, 0}, true));
  Mesh tri = ring_mesh(regular_polygon(3, {0, 0, 0}, false));
  Mesh mesh;
  mesh.dim = 2;
  mesh.vertices = penta.vertices;
  mesh.cells = penta.cells;
  // Merge the triangle ring, identifying coincident vertices.
  std::vector<int> remap(tri.num_vertices(), -1);
  for (int v = 0; v < tri.num_vertices(); ++v) {
    for (int w = 0; w < static_cast<int>(mesh.vertices.size()); ++w)
      if ((tri.vertices[v] - mesh.vertices[w]).norm() < 1e-12) {
        remap[v] = w;
        break;
      }
    if (remap[v] < 0) {
      remap[v] = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(tri.vertices[v]);
    }
  }
  for (const auto& c : tri.cells) {
    std::vector<int> cc;
    for (int v : c) cc.push_back(remap[v]);
    mesh.cells.push_back(cc);
  }
  mesh.finalize();
  return mesh;
}

Mesh refine_uniform(const Mesh& mesh) {
  const int d = mesh.dim;
  Mesh out;
  out.dim = d;
  out.vertices = mesh.vertices;
  std::map<std::vector<int>, int> midpoint;  // sorted corner set -> vertex id

  auto lattice_vertex = [&](const std::vector<int>& cell, const std::array<int, 3>& m) {
    std::vector<int> support;
    std::vector<std::vector<int>> choices(d);
    for (int a = 0; a < d; ++a)
      choices[a] = (m[a] == 0) ? std::vector<int>{0}
                 : (m[a] == 2) ? std::vector<int>{1}
                                : std::vector<int>{0, 1};
    std::vector<int> idx(d, 0);
    while (true) {
      int corner = 0;
      for (int a = 0; a < d; ++a) corner |= choices[a][idx[a]] << a;
      support.push_back(cell[corner]);
      int a = 0;
      for (; a < d; ++a) {
        if (++idx[a] < static_cast<int>(choices[a].size())) break;
        idx[a] = 0;
      }
      if (a == d) break;
    }
    if (support.size() == 1) return support[0];
    std::vector<int> key = support;
    std::sort(key.begin(), key.end());
    auto [it, inserted] = midpoint.try_emplace(key, static_cast<int>(out.vertices.size()));
    if (inserted) {
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      for (int s : support) v += mesh.vertices[s];
      out.vertices.push_back(v / static_cast<double>(support.size()));
    }
    return it->second;
  };

  std::vector<int> child_parent;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const int nchild = 1 << d;
    for (int q = 0; q < nchild; ++q) {
      std::vector<int> corners;
      for (int b = 0; b < (1 << d); ++b) {
        std::array<int, 3> m{0, 0, 0};
        for (int a = 0; a < d; ++a) m[a] = ((q >> a) & 1) + ((b >> a) & 1);
        corners.push_back(lattice_vertex(mesh.cells[c], m));
      }
      out.cells.push_back(corners);
      child_parent.push_back(c);
    }
  }
  out.finalize();
  // Inherit boundary tags from the parent facet at the same (axis, side).
  for (auto& f : out.facets) {
    if (f.ncells() != 1) continue;
    const int parent = child_parent[f.cell[0]];
    const int pf = mesh.find_facet(parent, f.axis[0], f.side[0]);
    if (pf >= 0) f.tag = mesh.facets[pf].tag;
  }
  return out;
}

PatchTopology vertex_star(const Mesh& mesh, int v) {
  if (v < 0 || v >= mesh.num_vertices())
    throw std::invalid_argument("vertex_star: bad vertex");
  PatchTopology patch;
  patch.vertex = v;
  patch.cells = mesh.vertex_cells[v];
  std::set<int> in_star(patch.cells.begin(), patch.cells.end());
  for (int fi = 0; fi < static_cast<int>(mesh.facets.size()); ++fi) {
    const Facet& f = mesh.facets[fi];
    bool touches = false;
    for (int r = 0; r < f.ncells(); ++r) touches |= in_star.count(f.cell[r]) > 0;
    if (!touches) continue;
    const bool through_v =
        std::find(f.vertices.begin(), f.vertices.end(), v) != f.vertices.end();
    if (through_v && f.ncells() == 2 && in_star.count(f.cell[0]) && in_star.count(f.cell[1]))
      patch.interior_facets.push_back(fi);
    else
      patch.boundary_facets.push_back(fi);
  }
  return patch;
}

void tag_boundary(Mesh& mesh, const std::function<bool(const Eigen::Vector3d&)>& pred,
                  FacetTag tag) {
  for (auto& f : mesh.facets) {
    if (f.ncells() != 1) continue;
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (int v : f.vertices) c += mesh.vertices[v];
    c /= static_cast<double>(f.vertices.size());
    if (pred(c)) f.tag = tag;
  }
}

namespace {

const char* tag_name(FacetTag t) {
  switch (t) {
    case FacetTag::Interior: return "interior";
    case FacetTag::Dirichlet: return "dirichlet";
    case FacetTag::Neumann: return "neumann";
  }
  return "interior";
}

FacetTag tag_from_name(const std::string& s) {
  if (s == "interior") return FacetTag::Interior;
  if (s == "dirichlet") return FacetTag::Dirichlet;
  if (s == "neumann") return FacetTag::Neumann;
  throw std::invalid_argument("mesh file: unknown facet tag '" + s + "'");
}

}  // namespace

void save_mesh(const Mesh& mesh, const std::string& path) {
  nlohmann::json j;
  j["dim"] = mesh.dim;
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const auto& v : mesh.vertices) {
    nlohmann::json c = nlohmann::json::array({v[0], v[1]});
    if (mesh.dim == 3) c.push_back(v[2]);
    verts.push_back(c);
  }
  j["cells"] = mesh.cells;
  auto& tags = j["facet_tags"] = nlohmann::json::array();
  for (const auto& f : mesh.facets)
    if (f.ncells() == 1)
      tags.push_back({{"cell", f.cell[0]},
                      {"local_facet", 2 * f.axis[0] + (f.side[0] > 0 ? 1 : 0)},
                      {"tag", tag_name(f.tag)}});
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_mesh: cannot open " + path);
  os << j.dump(1) << "\n";
}

Mesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_mesh: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("load_mesh: " + path + ": " + e.what());
  }
  Mesh mesh;
  try {
    mesh.dim = j.at("dim").get<int>();
    if (mesh.dim < 2 || mesh.dim > 3)
      throw std::invalid_argument("dim must be 2 or 3");
    for (const auto& c : j.at("vertices")) {
      Eigen::Vector3d v(0, 0, 0);
      for (int a = 0; a < mesh.dim; ++a) v[a] = c.at(a).get<double>();
      mesh.vertices.push_back(v);
    }
    mesh.cells = j.at("cells").get<std::vector<std::vector<int>>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_mesh: " + path + ": " + e.what());
  }
  mesh.finalize();
  if (j.contains("facet_tags"))
    for (const auto& t : j["facet_tags"]) {
      const int cell = t.at("cell").get<int>();
      const int lf = t.at("local_facet").get<int>();
      const int fi = mesh.find_facet(cell, lf / 2, (lf % 2) ? 1 : -1);
      if (fi < 0)
        throw std::runtime_error("load_mesh: facet_tags entry names a missing facet on cell " +
                                 std::to_string(cell));
      mesh.facets[fi].tag = tag_from_name(t.at("tag").get<std::string>());
    }
  // Validate map orientation: positive Jacobian at the 2^d Gauss points.
  const QuadratureRule q2 = gauss_legendre_rule(2);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    std::array<int, 3> iq{0, 0, 0};
    const int nq = 1 << mesh.dim;
    for (int k = 0; k < nq; ++k) {
      for (int a = 0; a < mesh.dim; ++a) iq[a] = (k >> a) & 1;
      Eigen::MatrixXd DF = Eigen::MatrixXd::Zero(mesh.dim, mesh.dim);
      for (int b = 0; b < (1 << mesh.dim); ++b) {
        for (int a = 0; a < mesh.dim; ++a) {
          double g = 0.5 * (((b >> a) & 1) ? 1.0 : -1.0);
          for (int o = 0; o < mesh.dim; ++o) {
            if (o == a) continue;
            const double xo = q2.points[iq[o]];
            g *= 0.5 * (((b >> o) & 1) ? (1.0 + xo) : (1.0 - xo));
          }
          for (int r = 0; r < mesh.dim; ++r) DF(r, a) += g * mesh.vertices[mesh.cells[c][b]][r];
        }
      }
      if (DF.determinant() <= 0)
        throw std::runtime_error("load_mesh: cell " + std::to_string(c) +
                                 " has a non-positive Jacobian (corner ordering)");
    }
  }
  return mesh;
}

}  // namespace fdmstar
