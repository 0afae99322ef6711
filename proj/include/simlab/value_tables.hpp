#pragma once

#include <vector>

namespace simlab {

// Per-layer action-value table: q[h][x][a].
struct QTable {
  std::vector<std::vector<std::vector<double>>> q;
};

// Per-layer state-value table: v[h][x]. The value after the last layer is 0
// by convention everywhere in the codebase.
struct VTable {
  std::vector<std::vector<double>> v;
};

}  // namespace simlab
