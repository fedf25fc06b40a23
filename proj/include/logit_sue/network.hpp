#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sue {

using NodeId = int;  // 0-based; files are 1-based

enum class CostKind {
  Bpr,     // t0 * (1 + alpha * (a / capacity)^beta)
  Affine,  // t0 + alpha * a
};

struct Link {
  NodeId tail = 0;
  NodeId head = 0;
  double capacity = 1.0;
  double length = 0.0;
  double free_flow_time = 0.0;
  double bpr_alpha = 0.15;
  double bpr_beta = 4.0;
  double speed = 0.0;
  double toll = 0.0;
  std::string link_type = "1";
  CostKind kind = CostKind::Bpr;
};

struct Network {
  std::vector<Link> links;
  int node_count = 0;
  int zone_count = 0;
  NodeId first_thru_node = 0;

  int link_count() const { return static_cast<int>(links.size()); }
};

struct OdPair {
  NodeId origin = 0;
  NodeId destination = 0;
  double demand = 0.0;
};

/// Positive-demand OD pairs sorted by (origin, destination). This order is the
/// OD-block order used by every path-indexed vector.
struct DemandTable {
  std::vector<OdPair> entries;
  double total_demand = 0.0;
  int zone_count = 0;
  std::vector<std::string> warnings;

  int size() const { return static_cast<int>(entries.size()); }
  double max_demand() const;
  DemandTable scaled(double multiplier) const;
};

Network parse_tntp_net(std::string_view content);
DemandTable parse_tntp_trips(std::string_view content);

Network load_tntp_net(const std::string& path);
DemandTable load_tntp_trips(const std::string& path);

/// Writes a net file that parses back to identical link records.
std::string write_tntp_net(const Network& net);

double link_cost(const Link& link, double flow);
double link_cost_derivative(const Link& link, double flow);

void link_costs(const Network& net, std::span<const double> flows, std::span<double> out);
void link_cost_derivatives(const Network& net, std::span<const double> flows,
                           std::span<double> out);

}  // namespace sue
