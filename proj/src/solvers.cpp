#include "logit_sue/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "logit_sue/error.hpp"
#include "logit_sue/kernels.hpp"
#include "logit_sue/operators.hpp"

namespace sue {

Method parse_method(std::string_view name) {
  if (name == "msa-hs") return Method::MsaHs;
  if (name == "msa-acs") return Method::MsaAcs;
  if (name == "bb1") return Method::Bb1;
  if (name == "bb2") return Method::Bb2;
  if (name == "bb1-acs") return Method::Bb1Acs;
  if (name == "bb2-acs") return Method::Bb2Acs;
  if (name == "bb-newton") return Method::BbNewton;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::MsaHs: return "msa-hs";
    case Method::MsaAcs: return "msa-acs";
    case Method::Bb1: return "bb1";
    case Method::Bb2: return "bb2";
    case Method::Bb1Acs: return "bb1-acs";
    case Method::Bb2Acs: return "bb2-acs";
    case Method::BbNewton: return "bb-newton";
  }
  return "unknown";
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::Initial: return "initial";
    case Phase::Harmonic: return "harmonic";
    case Phase::Constant: return "constant";
    case Phase::Bb1: return "bb1";
    case Phase::Bb2: return "bb2";
    case Phase::AcsFallback: return "acs_fallback";
    case Phase::Newton: return "newton";
  }
  return "unknown";
}

AcsState::AcsState(int i_s, double epsilon, int q)
    : i_s_(i_s), epsilon_(epsilon), q_(q), current_(i_s > 0 ? 1.0 / i_s : 1.0) {
  if (i_s < 1) throw std::invalid_argument("I_s must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (q < 2) throw std::invalid_argument("q must be at least 2");
}

void AcsState::observe(double gap) {
  queue_.push_back(gap);
  while (static_cast<int>(queue_.size()) > q_) queue_.pop_front();
}

double AcsState::step(int k) {
  if (k < 1) throw std::invalid_argument("iteration index must be at least 1");
  last_reset_ = false;
  if (k <= i_s_) {
    current_ = 1.0 / k;
    return current_;
  }
  if (static_cast<int>(queue_.size()) == q_) {
    const double g0 = queue_.front();
    const double glast = queue_.back();
    if (g0 > 0.0 && (g0 - glast) / g0 < epsilon_) {
      current_ = 1.0 / k;
      last_reset_ = true;
      // The condition is checked afresh over the next q observations.
      queue_.clear();
    }
  }
  return current_;
}

double acs_step(AcsState& state, int k, double new_gap) {
  state.observe(new_gap);
  return state.step(k);
}

std::vector<double> msa_update(std::span<const double> h, std::span<const double> target,
                               double s) {
  if (!(s > 0.0 && s <= 1.0)) throw DomainError("MSA step must lie in (0, 1]");
  if (h.size() != target.size()) throw DimensionError("msa_update: size mismatch");
  std::vector<double> out(h.begin(), h.end());
  kernels().axpby(s, target.data(), 1.0 - s, out.data(), out.size());
  return out;
}

std::optional<double> bb_step(std::span<const double> h_k, std::span<const double> h_km1,
                              std::span<const double> l_k, std::span<const double> l_km1,
                              BbVariant variant) {
  const std::size_t n = h_k.size();
  if (h_km1.size() != n || l_k.size() != n || l_km1.size() != n) {
    throw DimensionError("bb_step: size mismatch");
  }
  // y = Δh − ΔL
  double sy = 0.0, yy = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dh = h_k[i] - h_km1[i];
    const double y = dh - (l_k[i] - l_km1[i]);
    sy += dh * y;
    yy += y * y;
    ss += dh * dh;
  }
  const double num = variant == BbVariant::Bb1 ? sy : ss;
  const double den = variant == BbVariant::Bb1 ? yy : sy;
  if (den == 0.0) return std::nullopt;
  const double v = num / den;
  if (!std::isfinite(v)) return std::nullopt;
  return std::clamp(v, 0.0, 1.0);
}

NewtonOutcome newton_step(const FlowState& s, const NewtonConfig& cfg) {
  const auto& prob = s.problem();
  NewtonOutcome out;
  const auto f = s.residual();
  const double fn = s.residual_norm();
  out.residual_norm = fn;
  if (fn == 0.0) {
    out.accepted = true;
    out.trial.assign(s.h().begin(), s.h().end());
    return out;
  }
  // Floor keeps the request above what double precision GMRES can deliver.
  out.eta = std::max(std::min(cfg.eta_tol, cfg.nu2 * fn), 1e-12);
  const SOperator sop(s);
  const JOperator jop(s);
  std::vector<double> jv(f.size());
  const LinearOperator a = [&](std::span<const double> v, std::span<double> res) {
    jop.apply(v, jv);
    sop.apply(jv, res);
    kernels().axpy(1.0, v.data(), res.data(), res.size());
  };
  const int max_dim = std::min(cfg.gmres_max_dim, prob.n());
  const auto gm = gmres(a, f, GmresOptions{out.eta, max_dim, cfg.gmres_max_restarts});
  out.gmres_iterations = gm.iterations;
  out.gmres_relative_residual = gm.relative_residual;
  if (!gm.converged) {
    out.reason = "gmres did not converge";
    return out;
  }

  const auto h = s.h();
  out.trial.resize(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out.trial[i] = h[i] + gm.solution[i];

  // Components below the absolute accuracy of the step carry no information
  // about their own value. They are zeroed, their flow moved to the largest
  // path of the OD, and then set to their logit target at the new costs; the
  // gap functions weigh ln h, so they need relative accuracy on tiny flows.
  const auto off = prob.od_offsets();
  const auto dem = prob.od_demand();
  const double step_accuracy = gm.relative_residual * fn;
  std::vector<int> snapped;
  std::vector<int> largest(static_cast<std::size_t>(prob.od_count()));
  for (int r = 0; r < prob.od_count(); ++r) {
    const double tol = 1e-12 * std::max(1.0, dem[r]);
    const double floor = std::max(tol, std::min(step_accuracy, 1e-6 * dem[r]));
    int big = off[r];
    for (int i = off[r]; i < off[r + 1]; ++i) {
      if (out.trial[i] < -tol) {
        out.reason = "trial has a negative component";
        return out;
      }
      if (out.trial[i] > out.trial[big]) big = i;
    }
    largest[r] = big;
    double moved = 0.0;
    for (int i = off[r]; i < off[r + 1]; ++i) {
      if (i != big && out.trial[i] <= floor) {
        moved += out.trial[i];
        out.trial[i] = 0.0;
        snapped.push_back(i);
      }
    }
    out.trial[big] += moved;
  }

  FlowState ts(prob, out.trial);
  if (!snapped.empty()) {
    const auto target = ts.target();
    auto th = out.trial;
    std::size_t j = 0;
    for (int r = 0; r < prob.od_count(); ++r) {
      for (; j < snapped.size() && snapped[j] < off[r + 1]; ++j) {
        th[snapped[j]] = target[snapped[j]];
        th[largest[r]] -= target[snapped[j]];
      }
    }
    // Far from equilibrium the snapped targets can outweigh the largest path.
    for (const int i : largest) {
      if (!(th[i] > 0.0)) {
        out.reason = "snapping leaves a path without flow";
        return out;
      }
    }
    out.trial = th;
    ts.set_h(std::move(th));
  }
  if (demand_violation(prob, out.trial) > 1e-8) {
    out.reason = "trial does not preserve OD demand";
    return out;
  }
  const double fnew = ts.residual_norm();
  if (fnew > (1.0 - cfg.nu1) * fn) {
    out.reason = "insufficient decrease";
    out.residual_norm = fnew;
    return out;
  }
  out.residual_norm = fnew;
  out.accepted = true;
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

bool is_msa(Method m) { return m == Method::MsaHs || m == Method::MsaAcs; }
bool uses_acs(Method m) {
  return m == Method::MsaAcs || m == Method::Bb1Acs || m == Method::Bb2Acs ||
         m == Method::BbNewton;
}
BbVariant variant_of(Method m) {
  return m == Method::Bb2 || m == Method::Bb2Acs ? BbVariant::Bb2 : BbVariant::Bb1;
}

TraceRow measure(const FlowState& s, int iter, double step, Phase phase, double wall) {
  TraceRow row;
  row.iter = iter;
  row.rgap = rgap(s);
  row.residual_norm = s.residual_norm();
  row.aec = aec(s);
  row.step_size = step;
  row.phase = phase;
  row.wall_s = wall;
  return row;
}

}  // namespace

SolveRun solve(const SueProblem& prob, std::vector<double> h0, const SolveOptions& opt) {
  if (!(opt.rgap_target > 0.0 && opt.rgap_target < 1.0)) {
    throw std::invalid_argument("rgap target must lie in (0, 1)");
  }
  for (std::size_t i = 1; i < opt.thresholds.size(); ++i) {
    if (!(opt.thresholds[i] < opt.thresholds[i - 1])) {
      throw std::invalid_argument("Newton thresholds must be strictly decreasing");
    }
  }
  SolveRun run;
  run.method = opt.method;
  run.theta = prob.theta();
  run.rgap_target = opt.rgap_target;
  run.time_budget_s = opt.time_budget_s;

  FlowState cur(prob, std::move(h0));
  run.trace.push_back(measure(cur, 0, 0.0, Phase::Initial, 0.0));

  AcsState acs(opt.i_s, opt.epsilon, opt.q);
  std::vector<double> prev_h, prev_l;
  std::vector<char> crossed(opt.thresholds.size(), 0);
  bool newton_mode = false;

  const std::size_t ring_size = static_cast<std::size_t>(opt.rate_window) + 1;
  std::deque<std::vector<double>> ring;
  std::vector<std::vector<double>> frozen;
  auto remember = [&](std::span<const double> h) {
    ring.emplace_back(h.begin(), h.end());
    while (ring.size() > ring_size) ring.pop_front();
  };
  remember(cur.h());

  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  if (run.trace.back().rgap <= opt.rgap_target) {
    run.converged = true;
    run.termination = "converged";
  }
  for (int k = 1; !run.converged; ++k) {
    if (opt.max_iterations > 0 && k > opt.max_iterations) {
      run.termination = "max_iterations";
      break;
    }
    if (elapsed() > opt.time_budget_s) {
      run.termination = "budget";
      break;
    }
    const double gap = cur.residual_norm();
    const double last_rgap = run.trace.back().rgap;
    if (uses_acs(opt.method) && opt.method != Method::MsaAcs) acs.observe(gap);

    double step = 0.0;
    Phase phase = Phase::Harmonic;
    std::vector<double> next;

    if (opt.method == Method::BbNewton) {
      bool new_crossing = false;
      for (std::size_t t = 0; t < opt.thresholds.size(); ++t) {
        if (!crossed[t] && last_rgap <= opt.thresholds[t]) {
          crossed[t] = 1;
          new_crossing = true;
        }
      }
      if (newton_mode || new_crossing) {
        ++run.newton_attempts;
        auto nt = newton_step(cur, opt.newton);
        newton_mode = nt.accepted;
        if (nt.accepted) {
          ++run.newton_accepted;
          run.newton_iterations.push_back(k);
          next = std::move(nt.trial);
          step = 1.0;
          phase = Phase::Newton;
        }
      }
    }

    if (next.empty()) {
      switch (opt.method) {
        case Method::MsaHs:
          step = 1.0 / k;
          phase = Phase::Harmonic;
          break;
        case Method::MsaAcs:
          step = acs_step(acs, k, gap);
          phase = k <= opt.i_s ? Phase::Harmonic : Phase::Constant;
          break;
        default: {
          const auto variant = variant_of(opt.method);
          std::optional<double> bb;
          if (!prev_h.empty()) bb = bb_step(cur.h(), prev_h, cur.target(), prev_l, variant);
          if (bb) {
            step = *bb;
            phase = variant == BbVariant::Bb1 ? Phase::Bb1 : Phase::Bb2;
          } else if (prev_h.empty()) {
            // No secant pair yet: start like the harmonic rule.
            step = 1.0 / k;
            phase = Phase::Harmonic;
          } else if (uses_acs(opt.method)) {
            step = acs.step(k);
            phase = Phase::AcsFallback;
          } else {
            run.termination = "numerical_failure";
            run.failure_reason = "Barzilai-Borwein step undefined at iteration " + std::to_string(k);
          }
        }
      }
      if (!run.termination.empty()) break;
      if (step > 0.0) {
        next = msa_update(cur.h(), cur.target(), step);
      } else {
        next.assign(cur.h().begin(), cur.h().end());
      }
    }

    prev_h.assign(cur.h().begin(), cur.h().end());
    prev_l.assign(cur.target().begin(), cur.target().end());
    cur.set_h(std::move(next));
    run.final_step = step;
    run.trace.push_back(measure(cur, k, step, phase, elapsed()));
    remember(cur.h());

    const double r = run.trace.back().rgap;
    if (frozen.empty() && r <= opt.rate_gap && ring.size() == ring_size) {
      frozen.assign(ring.begin(), ring.end());
    }
    if (!frozen.empty() && !run.observed_rate && r <= opt.rate_reference_gap) {
      run.observed_rate = observed_rate(frozen, cur.h());
    }
    if (r <= opt.rgap_target) {
      run.converged = true;
      run.termination = "converged";
    }
  }
  run.empirical_order = empirical_order(run);
  run.final_h.assign(cur.h().begin(), cur.h().end());
  run.solve_seconds = elapsed();
  return run;
}

SolveRun msa_solve(const SueProblem& prob, std::vector<double> h0, const SolveOptions& opt) {
  if (!is_msa(opt.method)) throw std::invalid_argument("msa_solve needs msa-hs or msa-acs");
  return solve(prob, std::move(h0), opt);
}

SolveRun bb_newton_solve(const SueProblem& prob, std::vector<double> h0, const SolveOptions& opt) {
  auto o = opt;
  o.method = Method::BbNewton;
  return solve(prob, std::move(h0), o);
}

namespace {

std::optional<double> order_term(double r0, double r1, double r2) {
  const double den = std::log(r1 / r0);
  const double num = std::log(r2 / r1);
  if (!std::isfinite(den) || !std::isfinite(num) || den == 0.0) return std::nullopt;
  return num / den;
}

}  // namespace

std::optional<double> empirical_order(std::span<const double> rgaps) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 2; k < rgaps.size(); ++k) {
    if (const auto t = order_term(rgaps[k - 2], rgaps[k - 1], rgaps[k])) {
      sum += *t;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

std::optional<double> empirical_order(const SolveRun& run) {
  double sum = 0.0;
  int count = 0;
  for (const int k : run.newton_iterations) {
    if (k < 2 || k >= static_cast<int>(run.trace.size())) continue;
    if (const auto t = order_term(run.trace[k - 2].rgap, run.trace[k - 1].rgap, run.trace[k].rgap)) {
      sum += *t;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

std::optional<double> observed_rate(const std::vector<std::vector<double>>& snapshots,
                                    std::span<const double> reference) {
  auto dist = [&](const std::vector<double>& h) {
    if (h.size() != reference.size()) throw DimensionError("observed_rate: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) s += (h[i] - reference[i]) * (h[i] - reference[i]);
    return std::sqrt(s);
  };
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 1; k < snapshots.size(); ++k) {
    const double den = dist(snapshots[k - 1]);
    if (den == 0.0) continue;
    sum += dist(snapshots[k]) / den;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

}  // namespace sue
