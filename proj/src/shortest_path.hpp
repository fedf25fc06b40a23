#pragma once

// Dijkstra shared by the two path generators.

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "logit_sue/network.hpp"
#include "logit_sue/pathset.hpp"

namespace sue::detail {

/// Outgoing link ids per node, in link order.
std::vector<std::vector<int>> out_links(const Network& net);

struct ShortestPathTree {
  std::vector<double> dist;
  std::vector<int> pred_link;  // -1 at the source and at unreached nodes

  bool reached(NodeId v) const { return dist[v] < std::numeric_limits<double>::infinity(); }
  Path path_to(const Network& net, NodeId v) const;
};

/// Single-source tree. Blocked masks may be empty. Stops early once `target`
/// is settled when target >= 0.
ShortestPathTree dijkstra(const Network& net, const std::vector<std::vector<int>>& adj,
                          std::span<const double> costs, NodeId source,
                          const std::vector<char>& blocked_links = {},
                          const std::vector<char>& blocked_nodes = {}, NodeId target = -1);

}  // namespace sue::detail
