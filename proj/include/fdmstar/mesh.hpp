#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <string>
#include <vector>

namespace fdmstar {

enum class FacetTag { Interior = 0, Dirichlet = 1, Neumann = 2 };

// A (d-1)-dimensional mesh entity. Each incident cell records the reference
// axis normal to the facet and the side (-1/+1) on which it lies. In 2D,
// tangential_flip says whether the two cells traverse the facet in opposite
// directions; in 3D, oriented==false marks a facet whose two corner lists do
// not match in order (such meshes are rejected by the discretizations).
struct Facet {
  std::array<int, 2> cell{-1, -1};
  std::array<int, 2> axis{-1, -1};
  std::array<int, 2> side{0, 0};
  bool tangential_flip = false;
  bool oriented = true;
  FacetTag tag = FacetTag::Interior;
  std::vector<int> vertices;  // corners as seen from cell[0], tensor order
  int ncells() const { return cell[1] >= 0 ? 2 : 1; }
};

struct PatchTopology {
  int vertex = -1;
  std::vector<int> cells;            // ascending
  std::vector<int> interior_facets;  // facets through the vertex shared by two patch cells
  std::vector<int> boundary_facets;  // remaining facets of the patch cells
};

struct Mesh {
  int dim = 2;
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::vector<int>> cells;  // 2^dim corners in tensor order
  std::vector<Facet> facets;
  std::vector<std::vector<int>> vertex_cells;

  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int corners_per_cell() const { return 1 << dim; }

  // Derives facets, tags untagged boundary facets Dirichlet, builds stars.
  void finalize();

  // Local corner indices (into a cell's corner list) of facet (axis, side),
  // in tensor order of the remaining axes.
  static std::vector<int> local_facet_corners(int dim, int axis, int side);
  int find_facet(int cell, int axis, int side) const;
};

Mesh cartesian_mesh(int dim, const std::vector<int>& counts,
                    const std::vector<double>& lengths);
Mesh parallelogram_mesh(int n, double theta);
// Ring of 5 quads around a pentagon center (one 5-valent interior vertex).
Mesh pentagon_mesh();
// Ring of 3 quads inside a triangle (one 3-valent interior vertex).
Mesh triquad_mesh();
// Pentagon and triangle rings glued along a unit edge: interior vertices of
// valence 5, 4 and 3.
Mesh unstructured_mesh();

Mesh refine_uniform(const Mesh& mesh);

Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);

PatchTopology vertex_star(const Mesh& mesh, int v);

// Retags boundary facets whose centroid satisfies the predicate.
void tag_boundary(Mesh& mesh, const std::function<bool(const Eigen::Vector3d&)>& pred,
                  FacetTag tag);

}  // namespace fdmstar
