// Yen's loopless k-shortest paths on a link-indexed graph (parallel links allowed).

#include <algorithm>
#include <set>
#include <tuple>

#include "logit_sue/error.hpp"
#include "logit_sue/pathset.hpp"
#include "shortest_path.hpp"

namespace sue {

namespace {

struct Candidate {
  double cost;
  std::vector<NodeId> nodes;
  Path links;

  bool operator<(const Candidate& o) const {
    return std::tie(cost, nodes, links) < std::tie(o.cost, o.nodes, o.links);
  }
};

}  // namespace

std::vector<Path> yen_k_shortest(const Network& net, NodeId origin, NodeId destination, int k,
                                 std::span<const double> costs) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (origin == destination) throw std::invalid_argument("origin equals destination");
  if (costs.size() != net.links.size()) throw DimensionError("yen: one cost per link expected");

  const auto adj = detail::out_links(net);
  const auto first = detail::dijkstra(net, adj, costs, origin, {}, {}, destination);
  if (!first.reached(destination)) throw NoPathError(origin, destination);

  std::vector<Path> accepted{first.path_to(net, destination)};
  std::vector<std::vector<NodeId>> accepted_nodes{path_nodes(net, accepted.front())};
  std::set<Path> known{accepted.front()};
  std::set<Candidate> pool;

  std::vector<char> blocked_links(net.links.size(), 0);
  std::vector<char> blocked_nodes(static_cast<std::size_t>(net.node_count), 0);

  while (static_cast<int>(accepted.size()) < k) {
    const Path& last = accepted.back();
    const auto& last_nodes = accepted_nodes.back();
    for (std::size_t i = 0; i < last.size(); ++i) {
      const NodeId spur = last_nodes[i];
      std::fill(blocked_links.begin(), blocked_links.end(), 0);
      std::fill(blocked_nodes.begin(), blocked_nodes.end(), 0);
      for (const auto& p : accepted) {
        if (p.size() > i && std::equal(last.begin(), last.begin() + i, p.begin())) {
          blocked_links[p[i]] = 1;
        }
      }
      for (std::size_t j = 0; j < i; ++j) blocked_nodes[last_nodes[j]] = 1;

      const auto tree =
          detail::dijkstra(net, adj, costs, spur, blocked_links, blocked_nodes, destination);
      if (!tree.reached(destination)) continue;
      Path full(last.begin(), last.begin() + i);
      const auto tail = tree.path_to(net, destination);
      full.insert(full.end(), tail.begin(), tail.end());
      if (known.contains(full)) continue;
      known.insert(full);
      pool.insert({path_cost(full, costs), path_nodes(net, full), full});
    }
    if (pool.empty()) break;
    auto best = pool.extract(pool.begin());
    accepted.push_back(std::move(best.value().links));
    accepted_nodes.push_back(std::move(best.value().nodes));
  }
  return accepted;
}

}  // namespace sue
