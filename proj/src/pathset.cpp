#include "logit_sue/pathset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "logit_sue/error.hpp"
#include "logit_sue/parallel.hpp"
#include "shortest_path.hpp"

namespace sue {

namespace detail {

std::vector<std::vector<int>> out_links(const Network& net) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(net.node_count));
  for (int l = 0; l < net.link_count(); ++l) adj[net.links[l].tail].push_back(l);
  return adj;
}

Path ShortestPathTree::path_to(const Network& net, NodeId v) const {
  Path p;
  while (pred_link[v] >= 0) {
    p.push_back(pred_link[v]);
    v = net.links[pred_link[v]].tail;
  }
  std::reverse(p.begin(), p.end());
  return p;
}

ShortestPathTree dijkstra(const Network& net, const std::vector<std::vector<int>>& adj,
                          std::span<const double> costs, NodeId source,
                          const std::vector<char>& blocked_links,
                          const std::vector<char>& blocked_nodes, NodeId target) {
  const auto n = static_cast<std::size_t>(net.node_count);
  ShortestPathTree t;
  t.dist.assign(n, std::numeric_limits<double>::infinity());
  t.pred_link.assign(n, -1);
  std::vector<char> done(n, 0);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  t.dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == target) break;
    for (const int l : adj[u]) {
      if (!blocked_links.empty() && blocked_links[l]) continue;
      const NodeId v = net.links[l].head;
      if (done[v] || (!blocked_nodes.empty() && blocked_nodes[v])) continue;
      const double nd = d + costs[l];
      if (nd < t.dist[v]) {
        t.dist[v] = nd;
        t.pred_link[v] = l;
        heap.emplace(nd, v);
      }
    }
  }
  return t;
}

}  // namespace detail

void PathSet::add_od(const OdPair& od, std::vector<Path> paths) {
  ods.push_back(od);
  for (auto& p : paths) path_links.push_back(std::move(p));
  od_offsets.push_back(static_cast<int>(path_links.size()));
}

PathMethod parse_path_method(std::string_view name) {
  if (name == "yen") return PathMethod::Yen;
  if (name == "penalty") return PathMethod::Penalty;
  throw std::invalid_argument("unknown path method '" + std::string(name) + "'");
}

std::string_view path_method_name(PathMethod m) {
  return m == PathMethod::Yen ? "yen" : "penalty";
}

std::vector<NodeId> path_nodes(const Network& net, const Path& path) {
  std::vector<NodeId> nodes;
  if (path.empty()) return nodes;
  nodes.reserve(path.size() + 1);
  nodes.push_back(net.links[path.front()].tail);
  for (const int l : path) nodes.push_back(net.links[l].head);
  return nodes;
}

double path_cost(const Path& path, std::span<const double> link_costs) {
  double s = 0.0;
  for (const int l : path) s += link_costs[l];
  return s;
}

std::vector<double> free_flow_link_costs(const Network& net) {
  std::vector<double> c(net.links.size());
  for (std::size_t l = 0; l < c.size(); ++l) c[l] = link_cost(net.links[l], 0.0);
  return c;
}

PathSet generate_paths(const Network& net, const DemandTable& demand, const PathGenConfig& cfg,
                       std::vector<std::string>* warnings) {
  if (cfg.k < 1) throw std::invalid_argument("k must be at least 1");
  for (const auto& od : demand.entries) {
    if (od.origin < 0 || od.origin >= net.node_count || od.destination < 0 ||
        od.destination >= net.node_count) {
      throw ValidationError("OD pair " + std::to_string(od.origin + 1) + "->" +
                            std::to_string(od.destination + 1) + " references an unknown node");
    }
  }
  const auto ff = free_flow_link_costs(net);
  const auto m = demand.entries.size();
  std::vector<std::vector<Path>> per_od(m);

  if (cfg.method == PathMethod::Yen) {
    parallel_for(m, [&](std::size_t r) {
      const auto& od = demand.entries[r];
      per_od[r] = yen_k_shortest(net, od.origin, od.destination, cfg.k, ff);
    });
  } else {
    // Entries are sorted by origin, so each origin owns a contiguous range.
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    for (std::size_t r = 0; r < m;) {
      std::size_t e = r;
      while (e < m && demand.entries[e].origin == demand.entries[r].origin) ++e;
      groups.emplace_back(r, e);
      r = e;
    }
    std::vector<std::vector<std::string>> group_warnings(groups.size());
    parallel_for(groups.size(), [&](std::size_t g) {
      const auto [b, e] = groups[g];
      std::vector<NodeId> dests;
      for (std::size_t r = b; r < e; ++r) dests.push_back(demand.entries[r].destination);
      auto res = penalty_paths(net, demand.entries[b].origin, cfg.k, cfg.seed, dests, ff);
      for (std::size_t r = b; r < e; ++r) per_od[r] = std::move(res.paths[r - b]);
      group_warnings[g] = std::move(res.warnings);
    });
    if (warnings) {
      for (auto& w : group_warnings) warnings->insert(warnings->end(), w.begin(), w.end());
    }
  }

  PathSet ps;
  for (std::size_t r = 0; r < m; ++r) {
    if (per_od[r].empty()) continue;
    ps.add_od(demand.entries[r], std::move(per_od[r]));
  }
  return ps;
}

IncidenceMatrix build_incidence(const PathSet& paths, const Network& net) {
  IncidenceMatrix d;
  d.rows = net.link_count();
  d.cols = paths.n_total();
  d.col_ptr.assign(static_cast<std::size_t>(d.cols) + 1, 0);
  d.row_ptr.assign(static_cast<std::size_t>(d.rows) + 1, 0);
  for (int i = 0; i < d.cols; ++i) {
    const auto& p = paths.path_links[i];
    if (p.empty()) throw ValidationError("path " + std::to_string(i) + " has no links");
    for (const int l : p) {
      if (l < 0 || l >= d.rows) {
        throw ValidationError("path " + std::to_string(i) + " references link " +
                              std::to_string(l) + " outside the network");
      }
      d.col_links.push_back(l);
      ++d.row_ptr[l + 1];
    }
    d.col_ptr[i + 1] = static_cast<int>(d.col_links.size());
  }
  for (int l = 0; l < d.rows; ++l) d.row_ptr[l + 1] += d.row_ptr[l];
  d.row_paths.resize(d.col_links.size());
  std::vector<int> fill(d.row_ptr.begin(), d.row_ptr.end() - 1);
  for (int i = 0; i < d.cols; ++i) {
    for (int j = d.col_ptr[i]; j < d.col_ptr[i + 1]; ++j) d.row_paths[fill[d.col_links[j]]++] = i;
  }
  return d;
}

void validate_pathset(const PathSet& paths, const Network& net) {
  if (paths.od_offsets.size() != paths.ods.size() + 1 || paths.od_offsets.front() != 0 ||
      paths.od_offsets.back() != paths.n_total()) {
    throw ValidationError("path set offsets do not match its OD list");
  }
  for (int r = 0; r < paths.od_count(); ++r) {
    if (paths.od_offsets[r + 1] <= paths.od_offsets[r]) {
      throw ValidationError("OD pair " + std::to_string(r) + " has no paths");
    }
    const auto& od = paths.ods[r];
    std::set<Path> seen;
    for (int i = paths.od_offsets[r]; i < paths.od_offsets[r + 1]; ++i) {
      const auto& p = paths.path_links[i];
      for (const int l : p) {
        if (l < 0 || l >= net.link_count()) {
          throw ValidationError("path " + std::to_string(i) + " references an unknown link");
        }
      }
      if (p.empty()) throw ValidationError("path " + std::to_string(i) + " is empty");
      for (std::size_t j = 1; j < p.size(); ++j) {
        if (net.links[p[j - 1]].head != net.links[p[j]].tail) {
          throw ValidationError("path " + std::to_string(i) + " is not contiguous");
        }
      }
      auto nodes = path_nodes(net, p);
      if (nodes.front() != od.origin || nodes.back() != od.destination) {
        throw ValidationError("path " + std::to_string(i) + " does not connect its OD pair");
      }
      std::sort(nodes.begin(), nodes.end());
      if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
        throw ValidationError("path " + std::to_string(i) + " repeats a node");
      }
      if (!seen.insert(p).second) {
        throw ValidationError("path " + std::to_string(i) + " duplicates another path of its OD");
      }
    }
  }
}

PathSetMetrics pathset_metrics(const PathSet& paths, std::span<const double> free_flow_costs) {
  if (free_flow_costs.size() != static_cast<std::size_t>(paths.n_total())) {
    throw DimensionError("pathset_metrics: one cost per path expected");
  }
  PathSetMetrics m;
  const int nod = paths.od_count();
  if (nod == 0) return m;
  for (int r = 0; r < nod; ++r) {
    const int b = paths.od_offsets[r];
    const int e = paths.od_offsets[r + 1];
    const int k = e - b;
    if (k < 1) throw DomainError("OD pair " + std::to_string(r) + " has no paths");
    double mean = 0.0;
    for (int i = b; i < e; ++i) mean += free_flow_costs[i];
    mean /= k;
    if (mean == 0.0) {
      throw DomainError("OD pair " + std::to_string(r) + " has zero mean path cost");
    }
    double var = 0.0;
    for (int i = b; i < e; ++i) var += (free_flow_costs[i] - mean) * (free_flow_costs[i] - mean);
    m.mean_cv += std::sqrt(var / k) / mean;

    if (k < 2) continue;
    std::vector<std::vector<int>> sets;
    for (int i = b; i < e; ++i) {
      auto s = paths.path_links[i];
      std::sort(s.begin(), s.end());
      sets.push_back(std::move(s));
    }
    double jac = 0.0;
    int pairs = 0;
    std::vector<int> scratch;
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        scratch.clear();
        std::set_intersection(sets[i].begin(), sets[i].end(), sets[j].begin(), sets[j].end(),
                              std::back_inserter(scratch));
        const auto inter = static_cast<double>(scratch.size());
        const auto uni = static_cast<double>(sets[i].size() + sets[j].size()) - inter;
        jac += uni > 0.0 ? inter / uni : 0.0;
        ++pairs;
      }
    }
    m.mean_jaccard += jac / pairs;
  }
  m.mean_cv /= nod;
  m.mean_jaccard /= nod;
  return m;
}

std::string write_paths_text(const PathSet& paths) {
  std::ostringstream out;
  for (int r = 0; r < paths.od_count(); ++r) {
    for (int i = paths.od_offsets[r]; i < paths.od_offsets[r + 1]; ++i) {
      out << r << ' ' << paths.ods[r].origin + 1 << ' ' << paths.ods[r].destination + 1 << " :";
      const auto& p = paths.path_links[i];
      for (std::size_t j = 0; j < p.size(); ++j) out << (j == 0 ? " " : ",") << p[j] + 1;
      out << '\n';
    }
  }
  return out.str();
}

PathSet parse_paths_text(std::string_view text, const DemandTable& demand) {
  std::map<std::pair<NodeId, NodeId>, double> lookup;
  for (const auto& e : demand.entries) lookup[{e.origin, e.destination}] = e.demand;

  auto to_int = [](std::string_view s, int line) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError("expected an integer, found '" + std::string(s) + "'", line);
    }
    return v;
  };

  PathSet ps;
  std::vector<Path> block;
  int block_od = -1;
  OdPair current;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  auto flush = [&] {
    if (block_od >= 0) ps.add_od(current, std::move(block));
    block.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = line;
    while (!sv.empty() && (sv.back() == '\r' || sv.back() == ' ')) sv.remove_suffix(1);
    if (sv.empty() || sv.front() == '#') continue;
    const auto colon = sv.find(':');
    if (colon == std::string_view::npos) throw ParseError("missing ':' in path line", line_no);
    std::istringstream head{std::string(sv.substr(0, colon))};
    std::string a, b, c;
    if (!(head >> a >> b >> c)) throw ParseError("expected 'od_index origin destination'", line_no);
    const int od_index = to_int(a, line_no);
    const NodeId o = to_int(b, line_no) - 1;
    const NodeId d = to_int(c, line_no) - 1;
    if (od_index != block_od) {
      if (od_index != block_od + 1) throw ParseError("OD indices must be consecutive", line_no);
      flush();
      block_od = od_index;
      const auto it = lookup.find({o, d});
      if (it == lookup.end()) {
        throw ValidationError("line " + std::to_string(line_no) + ": OD pair " +
                              std::to_string(o + 1) + "->" + std::to_string(d + 1) +
                              " has no demand");
      }
      current = {o, d, it->second};
    } else if (o != current.origin || d != current.destination) {
      throw ParseError("OD index reused for a different pair", line_no);
    }
    Path p;
    std::string_view rest = sv.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      auto tok = rest.substr(0, comma);
      while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
      while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
      p.push_back(to_int(tok, line_no) - 1);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    block.push_back(std::move(p));
  }
  flush();
  return ps;
}

}  // namespace sue
