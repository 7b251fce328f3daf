#pragma once

#include <array>
#include <vector>

#include "fdmstar/mesh.hpp"
#include "fdmstar/ordering.hpp"

namespace fdmstar {

// One-dimensional ingredient family along a reference axis: CG is the
// GLL-nodal interval whose endpoint DOFs are shared across facets, DG is the
// GL-nodal interval with all DOFs cell-local.
enum class Family1D { CG, DG };

// A DOF layout binding a mesh to a (possibly vector-valued) space. Each
// component is a tensor product of per-axis interval families; components are
// numbered component-major. Lattice indices run axis 0 fastest.
struct Discretization {
  struct Component {
    std::array<Family1D, 3> family{Family1D::CG, Family1D::CG, Family1D::CG};
    std::array<int, 3> degree{0, 0, 0};
    int dofs_per_cell = 0;
    std::vector<std::vector<int>> cell_dofs;   // [cell][lattice] -> global dof
    // Modal identification: across a tangentially flipped shared facet the
    // FDM interior modes map to the same global index with a parity sign,
    // unlike the nodal values which map to the reversed index. cell_modes
    // holds the modal index map; cell_mode_flip_axis the axis whose mode
    // parity applies (-1 when none, i.e. the two maps coincide).
    std::vector<std::vector<int>> cell_modes;
    std::vector<std::vector<signed char>> cell_mode_flip_axis;
  };

  enum class Owner { Cell, Facet, Edge, Vertex };

  const Mesh* mesh = nullptr;
  std::vector<Component> comps;
  int ndof = 0;
  std::vector<DofLabel> labels;        // separator classification per dof
  std::vector<double> multiplicity;    // cell-sharing count per dof
  std::vector<char> constrained;       // strong Dirichlet mask
  std::vector<Owner> owner_kind;       // sharing entity, for star membership
  std::vector<int> owner_id;
  std::vector<int> dof_component;
  std::vector<std::array<int, 2>> edge_vertices;  // 3D edge endpoints

  int dim() const { return mesh->dim; }
  int num_components() const { return static_cast<int>(comps.size()); }
  int num_free() const;

  // Free DOFs whose owning entity lies in the star of vertex v, ascending.
  std::vector<int> star_dofs(int v) const;
  // DOFs of the cells sharing facet f (all components, cell 0 then cell 1).
  std::vector<int> facet_dofs(int f) const;

  // Zero the constrained entries in place.
  void project_free(Eigen::VectorXd& x) const;
};

Discretization q_space(const Mesh& mesh, int p);
Discretization dq_space(const Mesh& mesh, int p);
Discretization vector_q_space(const Mesh& mesh, int p);
// Raviart-Thomas of degree p on Cartesian 2D meshes: component j is CG degree
// p along axis j and DG degree p-1 along the other axis.
Discretization rt_space(const Mesh& mesh, int p);

}  // namespace fdmstar
