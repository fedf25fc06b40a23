#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logit_sue/network.hpp"

namespace sue {

/// Ordered link indices from origin to destination.
using Path = std::vector<int>;

/// OD-blocked path set. Paths of OD pair r occupy [od_offsets[r], od_offsets[r+1]).
struct PathSet {
  std::vector<OdPair> ods;
  std::vector<int> od_offsets{0};
  std::vector<Path> path_links;

  int n_total() const { return static_cast<int>(path_links.size()); }
  int od_count() const { return static_cast<int>(ods.size()); }
  int od_size(int r) const { return od_offsets[r + 1] - od_offsets[r]; }

  void add_od(const OdPair& od, std::vector<Path> paths);
};

/// Binary link-path incidence D stored both by row (links) and by column (paths).
struct IncidenceMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;   // rows + 1
  std::vector<int> row_paths;
  std::vector<int> col_ptr;   // cols + 1
  std::vector<int> col_links;

  int nnz() const { return static_cast<int>(col_links.size()); }
};

enum class PathMethod { Yen, Penalty };

PathMethod parse_path_method(std::string_view name);
std::string_view path_method_name(PathMethod m);

struct PathGenConfig {
  PathMethod method = PathMethod::Yen;
  int k = 20;
  std::uint64_t seed = 1;
};

/// Node sequence visited by a path, starting at the tail of its first link.
std::vector<NodeId> path_nodes(const Network& net, const Path& path);
double path_cost(const Path& path, std::span<const double> link_costs);
std::vector<double> free_flow_link_costs(const Network& net);

/// Up to k loopless paths ordered by cost, ties broken by node sequence then link ids.
std::vector<Path> yen_k_shortest(const Network& net, NodeId origin, NodeId destination, int k,
                                 std::span<const double> costs);

struct PenaltyPaths {
  /// Indexed like the `destinations` argument.
  std::vector<std::vector<Path>> paths;
  std::vector<std::string> warnings;
};

/// Link-penalty generator rooted at one origin; free-flow costs when `costs` is empty.
PenaltyPaths penalty_paths(const Network& net, NodeId origin, int k, std::uint64_t rng_seed,
                           std::span<const NodeId> destinations,
                           std::span<const double> costs = {});

/// Builds the path set for every OD pair of the demand table. OD pairs the
/// penalty method cannot reach are dropped and reported in `warnings`.
PathSet generate_paths(const Network& net, const DemandTable& demand, const PathGenConfig& cfg,
                       std::vector<std::string>* warnings = nullptr);

IncidenceMatrix build_incidence(const PathSet& paths, const Network& net);

/// Throws ValidationError when a structural invariant does not hold.
void validate_pathset(const PathSet& paths, const Network& net);

struct PathSetMetrics {
  double mean_cv = 0.0;
  double mean_jaccard = 0.0;
};

PathSetMetrics pathset_metrics(const PathSet& paths, std::span<const double> free_flow_costs);

/// `od_index origin destination : link,link,...` per line; nodes and links 1-based.
std::string write_paths_text(const PathSet& paths);
PathSet parse_paths_text(std::string_view text, const DemandTable& demand);

}  // namespace sue
