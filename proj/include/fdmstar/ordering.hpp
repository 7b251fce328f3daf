#pragma once

#include <vector>

namespace fdmstar {

// Elimination order plus the group boundaries it was built from.
// perm[k] is the original index eliminated k-th.
struct Ordering {
  std::vector<int> perm;
  std::vector<int> group_offsets;  // group g occupies [offsets[g], offsets[g+1])
};

Ordering natural_ordering(int n);

// DOF classification used by patch orderings. Interior DOFs carry their cell
// as the entity; facet/edge DOFs the facet/edge id; the vertex its own id.
enum class DofClass { Interior = 0, Facet = 1, Edge = 2, Vertex = 3 };

struct DofLabel {
  DofClass cls = DofClass::Interior;
  int entity = -1;  // negative = unclassified
};

// Interiors first (cell by cell, ascending), then one group per facet
// separator plane, then edge groups, then the vertex last. Ties break on
// the original index.
Ordering patch_ordering(const std::vector<DofLabel>& labels);

// Recursive coordinate bisection of a structured grid (axis 0 fastest in the
// linear index). Separator planes are ordered last and recursed themselves.
Ordering nested_dissection_structured(const std::vector<int>& dims);

}  // namespace fdmstar
