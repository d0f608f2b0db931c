#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <vector>

#include "cstree/model.hpp"

namespace cstree {

using BigCount = boost::multiprecision::cpp_int;

/// n-th Bell number via the Bell triangle.
BigCount bell(int n);

struct CubicalBellResult {
    BigCount value;
    bool tabulated = false;  // true when served from the published table (m == 6)
};

/// B^(c)_m: partitions of the (m-1)-cube's vertices into faces.  Exact cover
/// for m <= 5; m == 6 returns the tabulated value; larger m unsupported.
CubicalBellResult cubical_bell(int m);

/// Number of CStrees on p binary variables: p! * prod_{k=1..p} B^(c)_k.
BigCount count_cstrees(int p);

/// Number of compatibly labeled staged trees on p binary variables:
/// p! * prod_{k=1..p-1} B_{2^k}.
BigCount count_compatible_staged_trees(int p);

/// A face of the cube over coordinates with the given cardinalities:
/// fixed[i] == -1 means coordinate i is free.
using CubeFace = std::vector<int>;

/// Enumerates all partitions of the product space into faces, invoking the
/// callback once per partition.  Returns the number of partitions.
BigCount enumerate_face_partitions(const std::vector<int>& cards,
                                   const std::function<void(const std::vector<CubeFace>&)>& fn);
BigCount count_face_partitions(const std::vector<int>& cards);

/// All CStrees over the given variables: every ordering crossed with every
/// per-level face partition.  Guarded to small problems (total count must
/// stay under `limit`).
std::vector<CStree> enumerate_cstrees(const std::vector<VariableSpec>& vars,
                                      std::int64_t limit = 200000);

/// All CStrees with a fixed causal ordering.
std::vector<CStree> enumerate_cstrees_fixed_order(const std::vector<VariableSpec>& vars,
                                                  const std::vector<int>& order,
                                                  std::int64_t limit = 200000);

}  // namespace cstree
