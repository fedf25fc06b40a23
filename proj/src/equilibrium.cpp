#include "logit_sue/equilibrium.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "logit_sue/error.hpp"
#include "logit_sue/kernels.hpp"

namespace sue {

SueProblem::SueProblem(Network net, PathSet paths, double theta)
    : net_(std::move(net)), paths_(std::move(paths)), theta_(theta) {
  if (!(theta_ > 0.0) || !std::isfinite(theta_)) throw DomainError("theta must be positive");
  validate_pathset(paths_, net_);
  d_ = build_incidence(paths_, net_);
  od_demand_.reserve(paths_.ods.size());
  for (const auto& od : paths_.ods) {
    if (!(od.demand > 0.0)) throw ValidationError("OD demand must be positive");
    od_demand_.push_back(od.demand);
  }
}

double SueProblem::max_demand() const {
  double m = 0.0;
  for (const double d : od_demand_) m = std::max(m, d);
  return m;
}

double SueProblem::total_demand() const {
  double s = 0.0;
  for (const double d : od_demand_) s += d;
  return s;
}

void load(const IncidenceMatrix& d, std::span<const double> h, std::span<double> a) {
  if (h.size() != static_cast<std::size_t>(d.cols) || a.size() != static_cast<std::size_t>(d.rows)) {
    throw DimensionError("load: expected " + std::to_string(d.cols) + " path flows and " +
                         std::to_string(d.rows) + " links");
  }
  kernels().gather_sum(d.row_ptr.data(), d.row_paths.data(), h.data(), a.data(), a.size());
}

std::vector<double> load(const IncidenceMatrix& d, std::span<const double> h) {
  std::vector<double> a(static_cast<std::size_t>(d.rows));
  load(d, h, a);
  return a;
}

std::vector<double> path_costs(const SueProblem& prob, std::span<const double> h) {
  const auto& d = prob.incidence();
  const auto a = load(d, h);
  std::vector<double> t(a.size());
  link_costs(prob.network(), a, t);
  std::vector<double> c(static_cast<std::size_t>(d.cols));
  kernels().gather_sum(d.col_ptr.data(), d.col_links.data(), t.data(), c.data(), c.size());
  return c;
}

void logit_probabilities(std::span<const double> c, double theta, std::span<const int> od_offsets,
                         std::span<double> p) {
  if (c.size() != p.size()) throw DimensionError("logit_probabilities: size mismatch");
  if (od_offsets.empty() || static_cast<std::size_t>(od_offsets.back()) != c.size()) {
    throw DimensionError("logit_probabilities: offsets do not cover the cost vector");
  }
  const std::size_t nod = od_offsets.size() - 1;
  for (std::size_t r = 0; r < nod; ++r) {
    const int b = od_offsets[r];
    const int e = od_offsets[r + 1];
    double cmin = c[b];
    for (int i = b + 1; i < e; ++i) cmin = std::min(cmin, c[i]);
    for (int i = b; i < e; ++i) p[i] = -theta * (c[i] - cmin);
  }
  kernels().exp(p.data(), p.data(), p.size());
  constexpr double tiny = std::numeric_limits<double>::min();
  for (std::size_t r = 0; r < nod; ++r) {
    const int b = od_offsets[r];
    const int e = od_offsets[r + 1];
    double s = 0.0;
    for (int i = b; i < e; ++i) s += p[i];
    bool clamped = false;
    for (int i = b; i < e; ++i) {
      p[i] /= s;
      if (!(p[i] >= tiny)) {
        p[i] = tiny;
        clamped = true;
      }
    }
    if (clamped) {
      s = 0.0;
      for (int i = b; i < e; ++i) s += p[i];
      for (int i = b; i < e; ++i) p[i] = std::max(p[i] / s, tiny);
    }
  }
}

std::vector<double> logit_probabilities(std::span<const double> c, double theta,
                                        std::span<const int> od_offsets) {
  std::vector<double> p(c.size());
  logit_probabilities(c, theta, od_offsets, p);
  return p;
}

std::uint64_t FlowState::next_revision() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

FlowState::FlowState(const SueProblem& prob, std::vector<double> h) : prob_(&prob) {
  set_h(std::move(h));
}

void FlowState::set_h(std::vector<double> h) {
  if (h.size() != static_cast<std::size_t>(prob_->n())) {
    throw DimensionError("flow state: expected " + std::to_string(prob_->n()) + " path flows, got " +
                         std::to_string(h.size()));
  }
  h_ = std::move(h);
  invalidate();
}

std::span<double> FlowState::mutable_h() {
  invalidate();
  return h_;
}

void FlowState::invalidate() {
  revision_ = next_revision();
  a_ok_ = c_ok_ = p_ok_ = l_ok_ = f_ok_ = t_ok_ = false;
}

std::span<const double> FlowState::link_flows() const {
  if (!a_ok_) {
    for (const double x : h_) {
      if (!(x >= 0.0)) throw DomainError("path flows must be non-negative");
    }
    a_.resize(static_cast<std::size_t>(prob_->link_count()));
    load(prob_->incidence(), h_, a_);
    a_ok_ = true;
  }
  return a_;
}

std::span<const double> FlowState::costs() const {
  if (!c_ok_) {
    const auto a = link_flows();
    std::vector<double> t(a.size());
    link_costs(prob_->network(), a, t);
    const auto& d = prob_->incidence();
    c_.resize(h_.size());
    kernels().gather_sum(d.col_ptr.data(), d.col_links.data(), t.data(), c_.data(), c_.size());
    c_ok_ = true;
  }
  return c_;
}

std::span<const double> FlowState::probabilities() const {
  if (!p_ok_) {
    const auto c = costs();
    p_.resize(h_.size());
    logit_probabilities(c, prob_->theta(), prob_->od_offsets(), p_);
    p_ok_ = true;
  }
  return p_;
}

std::span<const double> FlowState::target() const {
  if (!l_ok_) {
    const auto p = probabilities();
    const auto off = prob_->od_offsets();
    const auto dem = prob_->od_demand();
    l_.resize(h_.size());
    for (int r = 0; r < prob_->od_count(); ++r) {
      for (int i = off[r]; i < off[r + 1]; ++i) l_[i] = dem[r] * p[i];
    }
    l_ok_ = true;
  }
  return l_;
}

std::span<const double> FlowState::residual() const {
  if (!f_ok_) {
    const auto l = target();
    f_.resize(h_.size());
    for (std::size_t i = 0; i < h_.size(); ++i) f_[i] = l[i] - h_[i];
    f_norm_ = norm2(f_);
    f_ok_ = true;
  }
  return f_;
}

double FlowState::residual_norm() const {
  residual();
  return f_norm_;
}

std::span<const double> FlowState::marginal_costs() const {
  if (!t_ok_) {
    const auto a = link_flows();
    tprime_.resize(a.size());
    link_cost_derivatives(prob_->network(), a, tprime_);
    t_ok_ = true;
  }
  return tprime_;
}

std::vector<double> free_flow_loading(const SueProblem& prob) {
  const std::vector<double> zero(static_cast<std::size_t>(prob.n()), 0.0);
  const auto c = path_costs(prob, zero);
  const auto p = logit_probabilities(c, prob.theta(), prob.od_offsets());
  std::vector<double> h(p.size());
  const auto off = prob.od_offsets();
  const auto dem = prob.od_demand();
  for (int r = 0; r < prob.od_count(); ++r) {
    for (int i = off[r]; i < off[r + 1]; ++i) h[i] = dem[r] * p[i];
  }
  return h;
}

std::vector<double> logit_mapping(const FlowState& s) {
  const auto l = s.target();
  return {l.begin(), l.end()};
}

std::vector<double> residual(const FlowState& s) {
  const auto f = s.residual();
  return {f.begin(), f.end()};
}

namespace {

struct GapParts {
  double excess = 0.0;    // Σ h (w − w_min)
  double weighted = 0.0;  // Σ h |w|
};

GapParts gap_parts(const FlowState& s) {
  const auto h = s.h();
  for (const double x : h) {
    if (!(x > 0.0)) {
      throw DomainError("gap evaluation needs strictly positive path flows; clamp h first");
    }
  }
  const auto c = s.costs();
  const auto& prob = s.problem();
  const double inv_theta = 1.0 / prob.theta();
  const auto off = prob.od_offsets();
  GapParts g;
  std::vector<double> w;
  for (int r = 0; r < prob.od_count(); ++r) {
    const int b = off[r];
    const int e = off[r + 1];
    w.resize(static_cast<std::size_t>(e - b));
    double wmin = std::numeric_limits<double>::infinity();
    for (int i = b; i < e; ++i) {
      const double wi = c[i] + inv_theta * std::log(std::max(h[i], 1e-300));
      w[i - b] = wi;
      wmin = std::min(wmin, wi);
    }
    for (int i = b; i < e; ++i) {
      g.excess += h[i] * (w[i - b] - wmin);
      g.weighted += h[i] * std::abs(w[i - b]);
    }
  }
  return g;
}

}  // namespace

double rgap(const FlowState& s) {
  const auto g = gap_parts(s);
  if (g.weighted == 0.0) return 0.0;
  return g.excess / g.weighted;
}

double aec(const FlowState& s) {
  const auto g = gap_parts(s);
  const double total = s.problem().total_demand();
  return total > 0.0 ? g.excess / total : 0.0;
}

double demand_violation(const SueProblem& prob, std::span<const double> h) {
  const auto off = prob.od_offsets();
  const auto dem = prob.od_demand();
  double worst = 0.0;
  for (int r = 0; r < prob.od_count(); ++r) {
    double sum = 0.0;
    for (int i = off[r]; i < off[r + 1]; ++i) sum += h[i];
    worst = std::max(worst, std::abs(sum - dem[r]) / dem[r]);
  }
  return worst;
}

double norm2(std::span<const double> x) {
  return std::sqrt(kernels().sum_sq(x.data(), x.size()));
}

}  // namespace sue
