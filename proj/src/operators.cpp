#include "logit_sue/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "logit_sue/error.hpp"
#include "logit_sue/kernels.hpp"

namespace sue {

namespace {

void check_size(std::size_t got, int want, const char* what) {
  if (got != static_cast<std::size_t>(want)) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

}  // namespace

SOperator::SOperator(const FlowState& s) : source_(&s), revision_(s.revision()) {
  const auto p = s.probabilities();
  p_.assign(p.begin(), p.end());
  const auto& prob = s.problem();
  offsets_.assign(prob.od_offsets().begin(), prob.od_offsets().end());
  for (const double d : prob.od_demand()) scale_.push_back(d * prob.theta());
}

void SOperator::check_current() const {
  if (source_->revision() != revision_) {
    throw ContractViolation("S operator applied after its flow state changed");
  }
}

void SOperator::apply(std::span<const double> v, std::span<double> out) const {
  check_current();
  check_size(v.size(), n(), "apply_S");
  check_size(out.size(), n(), "apply_S");
  for (std::size_t r = 0; r + 1 < offsets_.size(); ++r) {
    const int b = offsets_[r];
    const int e = offsets_[r + 1];
    double pv = 0.0;
    for (int i = b; i < e; ++i) pv += p_[i] * v[i];
    const double sc = scale_[r];
    for (int i = b; i < e; ++i) out[i] = sc * p_[i] * (v[i] - pv);
  }
}

JOperator::JOperator(const FlowState& s)
    : source_(&s), revision_(s.revision()), d_(&s.problem().incidence()) {
  const auto t = s.marginal_costs();
  tprime_.assign(t.begin(), t.end());
  link_buf_.resize(tprime_.size());
}

void JOperator::check_current() const {
  if (source_->revision() != revision_) {
    throw ContractViolation("J operator applied after its flow state changed");
  }
}

void JOperator::apply(std::span<const double> v, std::span<double> out) const {
  check_current();
  check_size(v.size(), n(), "apply_J");
  check_size(out.size(), n(), "apply_J");
  const auto& k = kernels();
  k.gather_sum(d_->row_ptr.data(), d_->row_paths.data(), v.data(), link_buf_.data(),
               link_buf_.size());
  k.mul(link_buf_.data(), tprime_.data(), link_buf_.data(), link_buf_.size());
  k.gather_sum(d_->col_ptr.data(), d_->col_links.data(), link_buf_.data(), out.data(), out.size());
}

std::vector<double> apply_S(const SOperator& s, std::span<const double> v) {
  std::vector<double> out(v.size());
  s.apply(v, out);
  return out;
}

std::vector<double> apply_J(const JOperator& j, std::span<const double> v) {
  std::vector<double> out(v.size());
  j.apply(v, out);
  return out;
}

void apply_I_minus_K(const SOperator& s, const JOperator& j, std::span<const double> v,
                     std::span<double> out) {
  check_size(v.size(), s.n(), "apply_I_minus_K");
  check_size(out.size(), s.n(), "apply_I_minus_K");
  std::vector<double> jv(v.size());
  j.apply(v, jv);
  s.apply(jv, out);
  kernels().axpy(1.0, v.data(), out.data(), out.size());
}

std::vector<double> apply_I_minus_K(const SOperator& s, const JOperator& j,
                                    std::span<const double> v) {
  std::vector<double> out(v.size());
  apply_I_minus_K(s, j, v, out);
  return out;
}

std::vector<double> apply_K(const SOperator& s, const JOperator& j, std::span<const double> v) {
  auto out = apply_S(s, apply_J(j, v));
  for (auto& x : out) x = -x;
  return out;
}

namespace {

template <class F>
Eigen::MatrixXd materialize(int n, int limit, F&& apply_col) {
  if (n > limit) {
    throw std::length_error("dense matrix refused: " + std::to_string(n) +
                            " paths exceed the dense limit of " + std::to_string(limit));
  }
  Eigen::MatrixXd m(n, n);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  std::vector<double> col(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    e[c] = 1.0;
    apply_col(e, col);
    e[c] = 0.0;
    for (int r = 0; r < n; ++r) m(r, c) = col[r];
  }
  return m;
}

}  // namespace

Eigen::MatrixXd dense_S(const SOperator& s, int limit) {
  return materialize(s.n(), limit, [&](const auto& e, auto& col) { s.apply(e, col); });
}

Eigen::MatrixXd dense_J(const JOperator& j, int limit) {
  return materialize(j.n(), limit, [&](const auto& e, auto& col) { j.apply(e, col); });
}

Eigen::MatrixXd dense_K(const SOperator& s, const JOperator& j, int limit) {
  s.check_current();
  std::vector<double> jv(static_cast<std::size_t>(s.n()));
  return materialize(s.n(), limit, [&](const auto& e, auto& col) {
    j.apply(e, jv);
    s.apply(jv, col);
    for (auto& x : col) x = -x;
  });
}

std::vector<double> apply_H_prime_h(const FlowState& s, std::span<const double> v) {
  const auto& prob = s.problem();
  check_size(v.size(), prob.n(), "apply_H_prime_h");
  const auto p = s.probabilities();
  const auto off = prob.od_offsets();
  std::vector<double> out(v.size());
  for (int r = 0; r < prob.od_count(); ++r) {
    double sum = 0.0;
    for (int i = off[r]; i < off[r + 1]; ++i) sum += v[i];
    for (int i = off[r]; i < off[r + 1]; ++i) out[i] = p[i] * sum;
  }
  return out;
}

double finite_difference_K_check(const FlowState& s, std::span<const double> v, double eps) {
  const auto& prob = s.problem();
  check_size(v.size(), prob.n(), "finite_difference_K_check");
  if (!(eps > 0.0)) throw DomainError("finite-difference step must be positive");
  const auto h = s.h();
  std::vector<double> hp(h.size()), hm(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    hp[i] = h[i] + eps * v[i];
    hm[i] = h[i] - eps * v[i];
    if (hp[i] < 0.0 || hm[i] < 0.0) {
      throw DomainError("finite-difference perturbation leaves the non-negative orthant");
    }
  }
  const FlowState sp(prob, std::move(hp));
  const FlowState sm(prob, std::move(hm));
  const SOperator sop(s);
  const JOperator jop(s);
  const auto kv = apply_K(sop, jop, v);
  const auto lp = sp.target();
  const auto lm = sm.target();
  double worst = 0.0;
  for (std::size_t i = 0; i < kv.size(); ++i) {
    worst = std::max(worst, std::abs((lp[i] - lm[i]) / (2.0 * eps) - kv[i]));
  }
  return worst;
}

double power_iteration(const std::function<void(std::span<const double>, std::span<double>)>& op,
                       int n, int max_iter, double tol, std::uint64_t seed) {
  if (n <= 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> x(static_cast<std::size_t>(n)), y(x.size());
  for (auto& v : x) v = normal(rng);
  double nx = norm2(x);
  for (auto& v : x) v /= nx;
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    op(x, y);
    const double next = kernels().dot(x.data(), y.data(), x.size());
    const double ny = norm2(y);
    if (ny == 0.0) return 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = y[i] / ny;
    if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace sue
