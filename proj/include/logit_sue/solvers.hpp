#pragma once

#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logit_sue/equilibrium.hpp"
#include "logit_sue/krylov.hpp"

namespace sue {

enum class Method { MsaHs, MsaAcs, Bb1, Bb2, Bb1Acs, Bb2Acs, BbNewton };
enum class Phase { Initial, Harmonic, Constant, Bb1, Bb2, AcsFallback, Newton };
enum class BbVariant { Bb1, Bb2 };

Method parse_method(std::string_view name);
std::string_view method_name(Method m);
std::string_view phase_name(Phase p);

/// Adaptive constant step: harmonic for k ≤ I_s, then constant with resets to
/// 1/k when the gap over the last q observations drops by less than ε.
class AcsState {
 public:
  AcsState(int i_s = 10, double epsilon = 0.01, int q = 3);

  /// Records ‖L(h) − h‖ of the current iterate.
  void observe(double gap);
  /// Step for iteration k ≥ 1 from the gaps observed so far.
  double step(int k);

  int i_s() const { return i_s_; }
  double current_step() const { return current_; }
  const std::deque<double>& queue() const { return queue_; }
  bool last_was_reset() const { return last_reset_; }

 private:
  int i_s_;
  double epsilon_;
  int q_;
  double current_;
  std::deque<double> queue_;
  bool last_reset_ = false;
};

/// observe(new_gap) followed by step(k).
double acs_step(AcsState& state, int k, double new_gap);

struct NewtonConfig {
  double eta_tol = 1e-2;
  double nu1 = 1e-4;
  double nu2 = 1e3;
  int gmres_max_dim = 200;
  int gmres_max_restarts = 5;
};

/// h' = (1 − s) h + s target
std::vector<double> msa_update(std::span<const double> h, std::span<const double> target,
                               double s);

/// Clipped Barzilai-Borwein step; empty when the quotient is undefined.
std::optional<double> bb_step(std::span<const double> h_k, std::span<const double> h_km1,
                              std::span<const double> l_k, std::span<const double> l_km1,
                              BbVariant variant);

struct NewtonOutcome {
  bool accepted = false;
  std::string reason;  // why a trial was rejected
  std::vector<double> trial;
  double residual_norm = 0.0;        // ‖F(trial)‖ when evaluated
  double gmres_relative_residual = 0.0;
  int gmres_iterations = 0;
  double eta = 0.0;
};

/// One inexact Newton step on (I − K) δ = F(h).
NewtonOutcome newton_step(const FlowState& s, const NewtonConfig& cfg);

struct TraceRow {
  int iter = 0;
  double rgap = 0.0;
  double residual_norm = 0.0;
  double aec = 0.0;
  double step_size = 0.0;
  Phase phase = Phase::Initial;
  double wall_s = 0.0;
};

struct SolveOptions {
  Method method = Method::BbNewton;
  double rgap_target = 1e-10;
  double time_budget_s = std::numeric_limits<double>::infinity();
  int max_iterations = 0;  // 0 = unlimited
  int i_s = 10;
  double epsilon = 0.01;
  int q = 3;
  NewtonConfig newton;
  std::vector<double> thresholds{1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
  int rate_window = 25;
  double rate_gap = 1e-9;
  double rate_reference_gap = 1e-10;
};

struct SolveRun {
  Method method = Method::BbNewton;
  double theta = 0.0;
  double rgap_target = 0.0;
  double time_budget_s = 0.0;
  std::vector<TraceRow> trace;
  bool converged = false;
  /// converged | budget | max_iterations | numerical_failure
  std::string termination;
  std::string failure_reason;
  std::vector<double> final_h;
  double final_step = 0.0;
  int newton_attempts = 0;
  int newton_accepted = 0;
  /// Iterations at which a Newton step was accepted.
  std::vector<int> newton_iterations;
  std::optional<double> empirical_order;
  std::optional<double> observed_rate;
  double solve_seconds = 0.0;

  int iterations() const { return trace.empty() ? 0 : trace.back().iter; }
  double final_rgap() const { return trace.empty() ? 0.0 : trace.back().rgap; }
};

/// Runs the selected method from h0 until RGAP ≤ target, the budget, or max_iterations.
SolveRun solve(const SueProblem& prob, std::vector<double> h0, const SolveOptions& opt);

SolveRun msa_solve(const SueProblem& prob, std::vector<double> h0, const SolveOptions& opt);
SolveRun bb_newton_solve(const SueProblem& prob, std::vector<double> h0, const SolveOptions& opt);

/// Mean of ln(r_k/r_{k−1}) / ln(r_{k−1}/r_{k−2}) over consecutive triples.
std::optional<double> empirical_order(std::span<const double> rgaps);
/// Same quotient averaged over the Newton-accepted iterations of a run.
std::optional<double> empirical_order(const SolveRun& run);

/// Mean of ‖h^k − ĥ‖ / ‖h^{k−1} − ĥ‖ over consecutive snapshots.
std::optional<double> observed_rate(const std::vector<std::vector<double>>& snapshots,
                                    std::span<const double> reference);

}  // namespace sue
