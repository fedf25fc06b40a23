// Link-penalty path generation: repeated shortest-path trees on a randomly
// penalized copy of the link costs.

#include <random>
#include <set>

#include "logit_sue/error.hpp"
#include "logit_sue/pathset.hpp"
#include "shortest_path.hpp"

namespace sue {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kPenaltyFactor = 1.5;

}  // namespace

PenaltyPaths penalty_paths(const Network& net, NodeId origin, int k, std::uint64_t rng_seed,
                           std::span<const NodeId> destinations, std::span<const double> costs) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  std::vector<double> c = costs.empty() ? free_flow_link_costs(net)
                                        : std::vector<double>(costs.begin(), costs.end());
  if (c.size() != net.links.size()) throw DimensionError("penalty: one cost per link expected");

  // One stream per origin so results do not depend on which worker runs it.
  std::mt19937_64 rng(splitmix64(rng_seed ^ splitmix64(static_cast<std::uint64_t>(origin))));
  const auto adj = detail::out_links(net);
  const std::size_t nd = destinations.size();

  PenaltyPaths out;
  out.paths.resize(nd);
  std::vector<std::set<Path>> seen(nd);
  std::vector<char> open(nd, 0);

  auto tree = detail::dijkstra(net, adj, c, origin);
  for (std::size_t j = 0; j < nd; ++j) {
    const NodeId d = destinations[j];
    if (d == origin) continue;
    if (!tree.reached(d)) {
      out.warnings.push_back("no path from node " + std::to_string(origin + 1) + " to node " +
                             std::to_string(d + 1) + "; OD pair omitted");
      continue;
    }
    auto p = tree.path_to(net, d);
    seen[j].insert(p);
    out.paths[j].push_back(std::move(p));
    open[j] = k > 1;
  }

  std::vector<char> selected(net.links.size(), 0);
  for (int round = 1; round < k; ++round) {
    std::fill(selected.begin(), selected.end(), 0);
    bool any_open = false;
    for (std::size_t j = 0; j < nd; ++j) {
      if (!open[j]) continue;
      any_open = true;
      for (const int l : out.paths[j].back()) {
        if (rng() >> 63) selected[l] = 1;
      }
    }
    if (!any_open) break;
    for (std::size_t l = 0; l < c.size(); ++l) {
      if (selected[l]) c[l] *= kPenaltyFactor;
    }
    tree = detail::dijkstra(net, adj, c, origin);
    bool added = false;
    for (std::size_t j = 0; j < nd; ++j) {
      if (!open[j]) continue;
      auto p = tree.path_to(net, destinations[j]);
      if (!seen[j].insert(p).second) continue;
      out.paths[j].push_back(std::move(p));
      added = true;
      if (static_cast<int>(out.paths[j].size()) >= k) open[j] = 0;
    }
    if (!added) break;
  }
  return out;
}

}  // namespace sue
