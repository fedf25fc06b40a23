#pragma once

// Shared networks for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "logit_sue/equilibrium.hpp"
#include "logit_sue/network.hpp"
#include "logit_sue/pathset.hpp"

namespace fixtures {

inline std::string data_path(const std::string& name) {
  return std::string(LOGIT_SUE_DATA_DIR) + "/" + name;
}

inline sue::Link affine(int tail, int head, double b0, double b1) {
  sue::Link l;
  l.tail = tail;
  l.head = head;
  l.free_flow_time = b0;
  l.bpr_alpha = b1;
  l.link_type = "affine";
  l.kind = sue::CostKind::Affine;
  return l;
}

/// O=0 A=1 B=2 D=3; links OA, OB, AD, BD, AB; paths O-A-D, O-B-D, O-A-B-D.
inline sue::Network braess_network() {
  sue::Network net;
  net.node_count = 4;
  net.zone_count = 4;
  net.links = {affine(0, 1, 0, 1), affine(0, 2, 5, 0), affine(1, 3, 5, 0), affine(2, 3, 0, 1),
               affine(1, 2, 0, 0)};
  return net;
}

inline sue::PathSet braess_paths(double demand = 6.0) {
  sue::PathSet ps;
  ps.add_od({0, 3, demand}, {{0, 2}, {1, 3}, {0, 4, 3}});
  return ps;
}

inline std::unique_ptr<sue::SueProblem> braess(double theta = 1.0) {
  return std::make_unique<sue::SueProblem>(braess_network(), braess_paths(), theta);
}

/// Two parallel links 0→1: c1 = h1, c2 = 2 + h2, d = 4.
inline std::unique_ptr<sue::SueProblem> two_link(double theta = 1.0) {
  sue::Network net;
  net.node_count = 2;
  net.zone_count = 2;
  net.links = {affine(0, 1, 0, 1), affine(0, 1, 2, 1)};
  sue::PathSet ps;
  ps.add_od({0, 1, 4.0}, {{0}, {1}});
  return std::make_unique<sue::SueProblem>(net, std::move(ps), theta);
}

/// Fixed point h1 of h1 = 4 / (1 + exp(θ(h1 − (2 + 4 − h1)))) by bisection.
inline double two_link_fixed_point(double theta = 1.0) {
  double lo = 0.0, hi = 4.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double g = mid - 4.0 / (1.0 + std::exp(theta * (mid - (6.0 - mid))));
    (g > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Random connected network with BPR or affine links and a few OD pairs.
/// Path count stays within [2, max_paths].
inline std::unique_ptr<sue::SueProblem> random_small(std::mt19937_64& rng, double theta,
                                                     int max_paths = 30) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const int nodes = 4 + static_cast<int>(rng() % 4);
    sue::Network net;
    net.node_count = nodes;
    net.zone_count = nodes;
    // A backbone chain keeps every node reachable from node 0.
    for (int v = 0; v + 1 < nodes; ++v) net.links.push_back({});
    const int extra = nodes + static_cast<int>(rng() % (2 * nodes));
    for (int e = 0; e < extra; ++e) net.links.push_back({});
    int idx = 0;
    for (auto& l : net.links) {
      if (idx < nodes - 1) {
        l.tail = idx;
        l.head = idx + 1;
      } else {
        l.tail = static_cast<int>(rng() % nodes);
        do l.head = static_cast<int>(rng() % nodes);
        while (l.head == l.tail);
      }
      ++idx;
      if (u(rng) < 0.7) {
        l.free_flow_time = 1.0 + 9.0 * u(rng);
        l.capacity = 5.0 + 15.0 * u(rng);
        l.bpr_alpha = 0.15;
        l.bpr_beta = 4.0;
      } else {
        l.kind = sue::CostKind::Affine;
        l.link_type = "affine";
        l.free_flow_time = 5.0 * u(rng);
        l.bpr_alpha = u(rng) < 0.2 ? 0.0 : 0.1 + u(rng);
      }
    }
    sue::DemandTable dem;
    const int ods = 1 + static_cast<int>(rng() % 3);
    for (int r = 0; r < ods; ++r) {
      const int o = static_cast<int>(rng() % (nodes - 1));
      const int d = o + 1 + static_cast<int>(rng() % (nodes - 1 - o));
      bool dup = false;
      for (const auto& e : dem.entries) dup = dup || (e.origin == o && e.destination == d);
      if (!dup) dem.entries.push_back({o, d, 1.0 + 19.0 * u(rng)});
    }
    std::sort(dem.entries.begin(), dem.entries.end(),
              [](const auto& a, const auto& b) {
                return std::pair(a.origin, a.destination) < std::pair(b.origin, b.destination);
              });
    sue::PathGenConfig pg;
    pg.k = 2 + static_cast<int>(rng() % 6);
    auto ps = sue::generate_paths(net, dem, pg);
    if (ps.n_total() < 2 || ps.n_total() > max_paths) continue;
    return std::make_unique<sue::SueProblem>(net, std::move(ps), theta);
  }
}

/// Strictly positive feasible flows drawn per OD.
inline std::vector<double> random_flows(const sue::SueProblem& prob, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> h(static_cast<std::size_t>(prob.n()));
  const auto off = prob.od_offsets();
  for (int r = 0; r < prob.od_count(); ++r) {
    double s = 0.0;
    for (int i = off[r]; i < off[r + 1]; ++i) s += h[i] = u(rng);
    for (int i = off[r]; i < off[r + 1]; ++i) h[i] *= prob.od_demand()[r] / s;
  }
  return h;
}

/// Random direction with zero sum inside every OD block.
inline std::vector<double> zero_sum_direction(const sue::SueProblem& prob, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(static_cast<std::size_t>(prob.n()));
  const auto off = prob.od_offsets();
  for (int r = 0; r < prob.od_count(); ++r) {
    double s = 0.0;
    for (int i = off[r]; i < off[r + 1]; ++i) s += v[i] = g(rng);
    const double mean = s / (off[r + 1] - off[r]);
    for (int i = off[r]; i < off[r + 1]; ++i) v[i] -= mean;
  }
  return v;
}

}  // namespace fixtures
