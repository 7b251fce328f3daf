#include "fdmstar/discretization.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace fdmstar {

namespace {

struct EntityTables {
  std::vector<std::array<int, 6>> cell_facets;      // [cell][2*axis+(side>0)]
  std::map<std::array<int, 2>, int> edge_lookup;    // sorted vertex pair -> id
  std::vector<std::array<int, 2>> edge_vertices;
};

EntityTables build_entities(const Mesh& mesh) {
  EntityTables tab;
  tab.cell_facets.assign(mesh.num_cells(), {-1, -1, -1, -1, -1, -1});
  for (int fi = 0; fi < static_cast<int>(mesh.facets.size()); ++fi) {
    const Facet& f = mesh.facets[fi];
    for (int r = 0; r < f.ncells(); ++r)
      tab.cell_facets[f.cell[r]][2 * f.axis[r] + (f.side[r] > 0 ? 1 : 0)] = fi;
  }
  if (mesh.dim == 3) {
    for (int c = 0; c < mesh.num_cells(); ++c)
      for (int a = 0; a < 3; ++a)
        for (int bits = 0; bits < 4; ++bits) {
          int base = 0, mm = bits;
          for (int o = 0; o < 3; ++o) {
            if (o == a) continue;
            if (mm & 1) base |= 1 << o;
            mm >>= 1;
          }
          std::array<int, 2> pair{mesh.cells[c][base], mesh.cells[c][base | (1 << a)]};
          if (pair[0] > pair[1]) std::swap(pair[0], pair[1]);
          auto [it, inserted] =
              tab.edge_lookup.try_emplace(pair, static_cast<int>(tab.edge_vertices.size()));
          if (inserted) tab.edge_vertices.push_back(pair);
        }
  }
  return tab;
}

}  // namespace

int Discretization::num_free() const {
  int n = 0;
  for (char c : constrained) n += !c;
  return n;
}

void Discretization::project_free(Eigen::VectorXd& x) const {
  for (int d = 0; d < ndof; ++d)
    if (constrained[d]) x[d] = 0.0;
}

std::vector<int> Discretization::facet_dofs(int f) const {
  const Facet& facet = mesh->facets[f];
  std::vector<int> out;
  for (int r = 0; r < facet.ncells(); ++r)
    for (const auto& comp : comps)
      out.insert(out.end(), comp.cell_dofs[facet.cell[r]].begin(),
                 comp.cell_dofs[facet.cell[r]].end());
  return out;
}

Discretization build_discretization(const Mesh& mesh,
                                    const std::vector<Discretization::Component>& spec) {
  Discretization disc;
  disc.mesh = &mesh;
  disc.comps = spec;
  const int d = mesh.dim;
  EntityTables tab = build_entities(mesh);
  disc.edge_vertices = tab.edge_vertices;

  for (auto& comp : disc.comps) {
    comp.dofs_per_cell = 1;
    for (int a = 0; a < d; ++a) comp.dofs_per_cell *= comp.degree[a] + 1;
    comp.cell_dofs.assign(mesh.num_cells(), std::vector<int>(comp.dofs_per_cell, -1));
    comp.cell_modes.assign(mesh.num_cells(), std::vector<int>(comp.dofs_per_cell, -1));
    comp.cell_mode_flip_axis.assign(mesh.num_cells(),
                                    std::vector<signed char>(comp.dofs_per_cell, -1));
  }

  for (int ci = 0; ci < disc.num_components(); ++ci) {
    auto& comp = disc.comps[ci];
    std::map<std::tuple<int, int, int>, int> shared;  // (kind, entity, index) -> dof
    for (int K = 0; K < mesh.num_cells(); ++K) {
      std::array<int, 3> idx{0, 0, 0};
      for (int lat = 0; lat < comp.dofs_per_cell; ++lat) {
        // Interface axes: endpoint slots. For CG axes these are shared with
        // the facet neighbor; DG slots stay cell-local but classify the same.
        int n_iface = 0;
        std::array<int, 3> iface_axis{-1, -1, -1}, iface_side{0, 0, 0};
        for (int a = 0; a < d; ++a) {
          const int pa = comp.degree[a];
          if (idx[a] == 0 || idx[a] == pa) {
            iface_axis[n_iface] = a;
            iface_side[n_iface] = (idx[a] == 0) ? -1 : 1;
            ++n_iface;
          }
        }

        // Sharing entity from the CG interface axes only.
        Discretization::Owner owner = Discretization::Owner::Cell;
        int owner_id = K;
        std::tuple<int, int, int> key{0, 0, 0};
        bool is_shared = false;
        int cg_count = 0;
        std::array<int, 3> cg_axes{}, cg_sides{};
        for (int a = 0; a < d; ++a)
          if (comp.family[a] == Family1D::CG && (idx[a] == 0 || idx[a] == comp.degree[a])) {
            cg_axes[cg_count] = a;
            cg_sides[cg_count] = (idx[a] == 0) ? -1 : 1;
            ++cg_count;
          }
        bool mode_flip = false;
        int mode_tangent_axis = -1;
        std::tuple<int, int, int> mode_key{0, 0, 0};
        if (cg_count == 1) {
          const int a = cg_axes[0], s = cg_sides[0];
          const int f = tab.cell_facets[K][2 * a + (s > 0 ? 1 : 0)];
          const Facet& facet = mesh.facets[f];
          // Tangential index in the canonical (cell[0]) traversal.
          std::array<int, 2> t{0, 0};
          std::array<int, 2> tdeg{0, 0};
          int nt = 0;
          int tangent_axis = -1;
          for (int b = 0; b < d; ++b) {
            if (b == a) continue;
            t[nt] = idx[b];
            tdeg[nt] = comp.degree[b];
            tangent_axis = b;
            ++nt;
          }
          mode_key = {1, f, t[0] + (tdeg[0] + 1) * t[1]};
          if (facet.ncells() == 2 && facet.cell[1] == K) {
            if (d == 2) {
              if (facet.tangential_flip) {
                t[0] = tdeg[0] - t[0];
                mode_flip = true;
                mode_tangent_axis = tangent_axis;
              }
            } else if (!facet.oriented) {
              throw std::invalid_argument(
                  "discretization: 3D meshes must have consistently oriented facets");
            }
          }
          owner = Discretization::Owner::Facet;
          owner_id = f;
          key = {1, f, t[0] + (tdeg[0] + 1) * t[1]};
          is_shared = true;
        } else if (cg_count == 2 && d == 3) {
          const int afree = 3 - cg_axes[0] - cg_axes[1];
          int bits = 0;
          for (int k = 0; k < 2; ++k)
            if (cg_sides[k] > 0) bits |= 1 << cg_axes[k];
          const int v0 = mesh.cells[K][bits];
          const int v1 = mesh.cells[K][bits | (1 << afree)];
          std::array<int, 2> pair{std::min(v0, v1), std::max(v0, v1)};
          const int edge = tab.edge_lookup.at(pair);
          const int i = (v0 < v1) ? idx[afree] : comp.degree[afree] - idx[afree];
          owner = Discretization::Owner::Edge;
          owner_id = edge;
          key = {2, edge, i};
          is_shared = true;
        } else if (cg_count == d) {
          int bits = 0;
          for (int k = 0; k < d; ++k)
            if (cg_sides[k] > 0) bits |= 1 << cg_axes[k];
          const int v = mesh.cells[K][bits];
          owner = Discretization::Owner::Vertex;
          owner_id = v;
          key = {3, v, 0};
          is_shared = true;
        } else if (cg_count == 2 && d == 2) {
          int bits = 0;
          for (int k = 0; k < 2; ++k)
            if (cg_sides[k] > 0) bits |= 1 << cg_axes[k];
          const int v = mesh.cells[K][bits];
          owner = Discretization::Owner::Vertex;
          owner_id = v;
          key = {3, v, 0};
          is_shared = true;
        }

        int dof = -1;
        if (is_shared) {
          auto [it, inserted] = shared.try_emplace(key, disc.ndof);
          dof = it->second;
          if (inserted) {
            disc.labels.push_back({});
            disc.multiplicity.push_back(0.0);
            disc.constrained.push_back(0);
            disc.owner_kind.push_back(owner);
            disc.owner_id.push_back(owner_id);
            disc.dof_component.push_back(ci);
            ++disc.ndof;
          }
        } else {
          dof = disc.ndof++;
          disc.labels.push_back({});
          disc.multiplicity.push_back(0.0);
          disc.constrained.push_back(0);
          disc.owner_kind.push_back(Discretization::Owner::Cell);
          disc.owner_id.push_back(K);
          disc.dof_component.push_back(ci);
        }
        comp.cell_dofs[K][lat] = dof;
        if (mode_flip) {
          comp.cell_modes[K][lat] = shared.at(mode_key);
          comp.cell_mode_flip_axis[K][lat] = static_cast<signed char>(mode_tangent_axis);
        } else {
          comp.cell_modes[K][lat] = dof;
        }
        disc.multiplicity[dof] += 1.0;

        // Strong Dirichlet marking through every CG interface facet.
        for (int k = 0; k < cg_count; ++k) {
          const int f = tab.cell_facets[K][2 * cg_axes[k] + (cg_sides[k] > 0 ? 1 : 0)];
          if (mesh.facets[f].ncells() == 1 && mesh.facets[f].tag == FacetTag::Dirichlet)
            disc.constrained[dof] = 1;
        }
        // In 3D, edge and vertex DOFs also sit on facets not aligned with a
        // single axis pair; the per-axis check above covers all of them since
        // each incident cell contributes its own axes.

        // Separator classification: by interface slot count over all axes.
        DofLabel label;
        if (n_iface == 0) {
          label = {DofClass::Interior, K};
        } else if (n_iface == 1) {
          const int f = tab.cell_facets[K][2 * iface_axis[0] + (iface_side[0] > 0 ? 1 : 0)];
          label = {DofClass::Facet, f};
        } else if (n_iface == 2 && d == 3) {
          const int afree = 3 - iface_axis[0] - iface_axis[1];
          int bits = 0;
          for (int k = 0; k < 2; ++k)
            if (iface_side[k] > 0) bits |= 1 << iface_axis[k];
          const int v0 = mesh.cells[K][bits];
          const int v1 = mesh.cells[K][bits | (1 << afree)];
          std::array<int, 2> pair{std::min(v0, v1), std::max(v0, v1)};
          label = {DofClass::Edge, tab.edge_lookup.at(pair)};
        } else {
          int bits = 0;
          for (int k = 0; k < n_iface; ++k)
            if (iface_side[k] > 0) bits |= 1 << iface_axis[k];
          label = {DofClass::Vertex, mesh.cells[K][bits]};
        }
        disc.labels[dof] = label;

        int a = 0;
        for (; a < d; ++a) {
          if (++idx[a] <= comp.degree[a]) break;
          idx[a] = 0;
        }
      }
    }
  }
  return disc;
}

std::vector<int> Discretization::star_dofs(int v) const {
  const auto& star_cells = mesh->vertex_cells[v];
  std::set<int> star(star_cells.begin(), star_cells.end());
  std::vector<int> out;
  for (const auto& comp : comps)
    for (int K : star_cells)
      for (int dof : comp.cell_dofs[K]) {
        if (constrained[dof]) continue;
        bool in = false;
        switch (owner_kind[dof]) {
          case Owner::Cell:
            in = star.count(owner_id[dof]) > 0;
            break;
          case Owner::Facet: {
            const auto& fv = mesh->facets[owner_id[dof]].vertices;
            in = std::find(fv.begin(), fv.end(), v) != fv.end();
            break;
          }
          case Owner::Edge:
            in = edge_vertices[owner_id[dof]][0] == v ||
                 edge_vertices[owner_id[dof]][1] == v;
            break;
          case Owner::Vertex:
            in = owner_id[dof] == v;
            break;
        }
        if (in) out.push_back(dof);
      }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Discretization q_space(const Mesh& mesh, int p) {
  Discretization::Component c;
  c.family = {Family1D::CG, Family1D::CG, Family1D::CG};
  c.degree = {p, p, p};
  return build_discretization(mesh, {c});
}

Discretization dq_space(const Mesh& mesh, int p) {
  Discretization::Component c;
  c.family = {Family1D::DG, Family1D::DG, Family1D::DG};
  c.degree = {p, p, p};
  return build_discretization(mesh, {c});
}

Discretization vector_q_space(const Mesh& mesh, int p) {
  Discretization::Component c;
  c.family = {Family1D::CG, Family1D::CG, Family1D::CG};
  c.degree = {p, p, p};
  return build_discretization(mesh, std::vector<Discretization::Component>(mesh.dim, c));
}

Discretization rt_space(const Mesh& mesh, int p) {
  if (mesh.dim != 2)
    throw std::invalid_argument("rt_space: only 2D Raviart-Thomas is supported");
  if (p < 1) throw std::invalid_argument("rt_space: degree must be >= 1");
  std::vector<Discretization::Component> comps(2);
  for (int j = 0; j < 2; ++j) {
    for (int a = 0; a < 2; ++a) {
      comps[j].family[a] = (a == j) ? Family1D::CG : Family1D::DG;
      comps[j].degree[a] = (a == j) ? p : p - 1;
    }
  }
  return build_discretization(mesh, comps);
}

}  // namespace fdmstar
