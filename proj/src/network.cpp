#include "logit_sue/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "logit_sue/error.hpp"

namespace sue {

namespace {

void check_flow(double flow) {
  if (!(flow >= 0.0)) {
    throw DomainError("link flow must be non-negative, got " + std::to_string(flow));
  }
}

}  // namespace

double DemandTable::max_demand() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.demand);
  return m;
}

DemandTable DemandTable::scaled(double multiplier) const {
  if (!(multiplier > 0.0)) throw DomainError("demand multiplier must be positive");
  DemandTable out = *this;
  out.total_demand = 0.0;
  for (auto& e : out.entries) {
    e.demand *= multiplier;
    out.total_demand += e.demand;
  }
  return out;
}

double link_cost(const Link& link, double flow) {
  check_flow(flow);
  if (link.kind == CostKind::Affine) return link.free_flow_time + link.bpr_alpha * flow;
  if (link.bpr_beta == 0.0) return link.free_flow_time * (1.0 + link.bpr_alpha);
  const double x = flow / link.capacity;
  return link.free_flow_time * (1.0 + link.bpr_alpha * std::pow(x, link.bpr_beta));
}

double link_cost_derivative(const Link& link, double flow) {
  check_flow(flow);
  if (link.kind == CostKind::Affine) return link.bpr_alpha;
  const double beta = link.bpr_beta;
  if (beta == 0.0 || link.bpr_alpha == 0.0 || link.free_flow_time == 0.0) return 0.0;
  const double x = flow / link.capacity;
  // d/da t0 (1 + alpha x^beta) = t0 alpha beta x^(beta-1) / capacity
  const double xp = beta == 1.0 ? 1.0 : std::pow(x, beta - 1.0);
  return link.free_flow_time * link.bpr_alpha * beta * xp / link.capacity;
}

void link_costs(const Network& net, std::span<const double> flows, std::span<double> out) {
  if (flows.size() != net.links.size() || out.size() != net.links.size()) {
    throw DimensionError("link_costs: expected " + std::to_string(net.links.size()) + " links");
  }
  for (std::size_t l = 0; l < net.links.size(); ++l) out[l] = link_cost(net.links[l], flows[l]);
}

void link_cost_derivatives(const Network& net, std::span<const double> flows,
                           std::span<double> out) {
  if (flows.size() != net.links.size() || out.size() != net.links.size()) {
    throw DimensionError("link_cost_derivatives: expected " + std::to_string(net.links.size()) +
                         " links");
  }
  for (std::size_t l = 0; l < net.links.size(); ++l) {
    out[l] = link_cost_derivative(net.links[l], flows[l]);
  }
}

}  // namespace sue
