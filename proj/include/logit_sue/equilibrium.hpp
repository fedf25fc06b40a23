#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "logit_sue/network.hpp"
#include "logit_sue/pathset.hpp"

namespace sue {

/// Immutable assignment instance: network, frozen path set, D and θ.
class SueProblem {
 public:
  SueProblem(Network net, PathSet paths, double theta);

  const Network& network() const { return net_; }
  const PathSet& paths() const { return paths_; }
  const IncidenceMatrix& incidence() const { return d_; }
  double theta() const { return theta_; }

  int n() const { return paths_.n_total(); }
  int od_count() const { return paths_.od_count(); }
  int link_count() const { return net_.link_count(); }
  std::span<const int> od_offsets() const { return paths_.od_offsets; }
  std::span<const double> od_demand() const { return od_demand_; }
  double max_demand() const;
  double total_demand() const;

 private:
  Network net_;
  PathSet paths_;
  IncidenceMatrix d_;
  double theta_;
  std::vector<double> od_demand_;
};

/// a = D h
void load(const IncidenceMatrix& d, std::span<const double> h, std::span<double> a);
std::vector<double> load(const IncidenceMatrix& d, std::span<const double> h);

/// c = Dᵀ τ(D h)
std::vector<double> path_costs(const SueProblem& prob, std::span<const double> h);

/// Per-OD softmax of −θc. Entries that underflow are raised to the smallest
/// normal double and the block renormalized.
void logit_probabilities(std::span<const double> c, double theta, std::span<const int> od_offsets,
                         std::span<double> p);
std::vector<double> logit_probabilities(std::span<const double> c, double theta,
                                        std::span<const int> od_offsets);

/// Path flows h with lazily computed a, c, p, L(h), F(h) and τ'(a).
/// Every write to h bumps revision() and drops the caches.
class FlowState {
 public:
  FlowState(const SueProblem& prob, std::vector<double> h);

  const SueProblem& problem() const { return *prob_; }
  std::span<const double> h() const { return h_; }
  std::uint64_t revision() const { return revision_; }

  void set_h(std::vector<double> h);
  /// Mutable access; invalidates every cache.
  std::span<double> mutable_h();

  std::span<const double> link_flows() const;
  std::span<const double> costs() const;
  std::span<const double> probabilities() const;
  std::span<const double> target() const;    // L(h)
  std::span<const double> residual() const;  // F(h) = L(h) − h
  std::span<const double> marginal_costs() const;
  double residual_norm() const;

 private:
  void invalidate();

  const SueProblem* prob_;
  std::vector<double> h_;
  std::uint64_t revision_ = 0;
  static std::uint64_t next_revision();

  mutable bool a_ok_ = false, c_ok_ = false, p_ok_ = false, l_ok_ = false, f_ok_ = false,
               t_ok_ = false;
  mutable std::vector<double> a_, c_, p_, l_, f_, tprime_;
  mutable double f_norm_ = 0.0;
};

/// Feasible h: every OD demand spread by logit probabilities at free-flow costs.
std::vector<double> free_flow_loading(const SueProblem& prob);

std::vector<double> logit_mapping(const FlowState& s);
std::vector<double> residual(const FlowState& s);

/// Σ h (w − w_min) / Σ h |w| with w = c + ln(h)/θ. Requires h > 0.
double rgap(const FlowState& s);
/// Σ h (w − w_min) / Σ d.
double aec(const FlowState& s);

/// Largest relative deviation of per-OD sums of h from d_OD.
double demand_violation(const SueProblem& prob, std::span<const double> h);

double norm2(std::span<const double> x);

}  // namespace sue
