#pragma once

#include <cstdint>
#include <vector>

namespace graphgeo {

// One (neighbor node, undirected edge) slot in a node's adjacency list.
// Lists are kept sorted by neighbor id; message passing iterates them in
// that order so results are reproducible bit for bit.
struct NeighborRef {
  std::int32_t node = 0;
  std::int32_t edge = 0;
};

using AdjacencyList = std::vector<std::vector<NeighborRef>>;

} // namespace graphgeo
