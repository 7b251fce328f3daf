#include "fdmstar/ordering.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace fdmstar {

Ordering natural_ordering(int n) {
  Ordering ord;
  ord.perm.resize(n);
  std::iota(ord.perm.begin(), ord.perm.end(), 0);
  ord.group_offsets = {0, n};
  return ord;
}

Ordering patch_ordering(const std::vector<DofLabel>& labels) {
  const int n = static_cast<int>(labels.size());
  for (const auto& l : labels)
    if (l.entity < 0) throw std::invalid_argument("patch_ordering: unclassified DOF");

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const auto& la = labels[a];
    const auto& lb = labels[b];
    if (la.cls != lb.cls) return static_cast<int>(la.cls) < static_cast<int>(lb.cls);
    if (la.entity != lb.entity) return la.entity < lb.entity;
    return a < b;
  });

  Ordering ord;
  ord.perm = idx;
  ord.group_offsets.push_back(0);
  for (int k = 1; k < n; ++k) {
    const auto& prev = labels[idx[k - 1]];
    const auto& cur = labels[idx[k]];
    const bool interior_pair =
        prev.cls == DofClass::Interior && cur.cls == DofClass::Interior;
    if (!interior_pair && (prev.cls != cur.cls || prev.entity != cur.entity))
      ord.group_offsets.push_back(k);
  }
  ord.group_offsets.push_back(n);
  return ord;
}

namespace {

struct Box {
  std::vector<int> lo, hi;  // inclusive
};

void nd_recurse(const Box& box, const std::vector<int>& dims, std::vector<int>& out) {
  const int d = static_cast<int>(dims.size());
  int axis = -1, ext = 1;
  for (int a = 0; a < d; ++a) {
    const int e = box.hi[a] - box.lo[a] + 1;
    if (e > ext) { ext = e; axis = a; }
  }
  if (axis < 0 || ext <= 2) {
    // Emit the whole box in ascending linear order.
    std::vector<int> i = box.lo;
    while (true) {
      int lin = 0, stride = 1;
      for (int a = 0; a < d; ++a) { lin += i[a] * stride; stride *= dims[a]; }
      out.push_back(lin);
      int a = 0;
      for (; a < d; ++a) {
        if (++i[a] <= box.hi[a]) break;
        i[a] = box.lo[a];
      }
      if (a == d) break;
    }
    return;
  }
  const int mid = box.lo[axis] + (ext - 1) / 2;
  Box left = box, right = box, sep = box;
  left.hi[axis] = mid - 1;
  right.lo[axis] = mid + 1;
  sep.lo[axis] = sep.hi[axis] = mid;
  nd_recurse(left, dims, out);
  nd_recurse(right, dims, out);
  nd_recurse(sep, dims, out);
}

}  // namespace

Ordering nested_dissection_structured(const std::vector<int>& dims) {
  int n = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("nested_dissection_structured: bad dims");
    n *= d;
  }
  Box box;
  box.lo.assign(dims.size(), 0);
  for (int d : dims) box.hi.push_back(d - 1);
  Ordering ord;
  ord.perm.reserve(n);
  nd_recurse(box, dims, ord.perm);
  ord.group_offsets = {0, n};
  return ord;
}

}  // namespace fdmstar
