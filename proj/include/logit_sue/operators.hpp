#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "logit_sue/equilibrium.hpp"

namespace sue {

/// Block-diagonal S with blocks d_OD·θ·(diag(p) − p pᵀ), snapshotted from a FlowState.
class SOperator {
 public:
  explicit SOperator(const FlowState& s);

  int n() const { return static_cast<int>(p_.size()); }
  void apply(std::span<const double> v, std::span<double> out) const;
  /// Throws ContractViolation when the source state changed since construction.
  void check_current() const;

  std::span<const double> probabilities() const { return p_; }

 private:
  const FlowState* source_;
  std::uint64_t revision_;
  std::vector<double> p_;
  std::vector<double> scale_;  // d_OD θ per OD
  std::vector<int> offsets_;
};

/// J = Dᵀ diag(τ') D, snapshotted from a FlowState.
class JOperator {
 public:
  explicit JOperator(const FlowState& s);

  int n() const { return d_->cols; }
  void apply(std::span<const double> v, std::span<double> out) const;
  void check_current() const;

  const IncidenceMatrix& incidence() const { return *d_; }
  std::span<const double> marginal_costs() const { return tprime_; }

 private:
  const FlowState* source_;
  std::uint64_t revision_;
  const IncidenceMatrix* d_;
  std::vector<double> tprime_;
  mutable std::vector<double> link_buf_;
};

std::vector<double> apply_S(const SOperator& s, std::span<const double> v);
std::vector<double> apply_J(const JOperator& j, std::span<const double> v);
/// (I − K) v = v + S (J v)
void apply_I_minus_K(const SOperator& s, const JOperator& j, std::span<const double> v,
                     std::span<double> out);
std::vector<double> apply_I_minus_K(const SOperator& s, const JOperator& j,
                                    std::span<const double> v);
/// K v = −S (J v)
std::vector<double> apply_K(const SOperator& s, const JOperator& j, std::span<const double> v);

inline constexpr int kDefaultDenseLimit = 20000;

/// Dense matrices built column by column from the operators.
Eigen::MatrixXd dense_S(const SOperator& s, int limit = kDefaultDenseLimit);
Eigen::MatrixXd dense_J(const JOperator& j, int limit = kDefaultDenseLimit);
Eigen::MatrixXd dense_K(const SOperator& s, const JOperator& j, int limit = kDefaultDenseLimit);

/// Closed form of H'_h = ∂H/∂h: per OD block, p 1ᵀ.
std::vector<double> apply_H_prime_h(const FlowState& s, std::span<const double> v);

/// ‖[L(h+εv) − L(h−εv)]/(2ε) − K v‖_∞
double finite_difference_K_check(const FlowState& s, std::span<const double> v, double eps);

/// Largest eigenvalue of a symmetric PSD operator by power iteration.
double power_iteration(const std::function<void(std::span<const double>, std::span<double>)>& op,
                       int n, int max_iter = 500, double tol = 1e-12, std::uint64_t seed = 7);

struct SpectralReport {
  std::vector<double> eigenvalues_real;
  std::vector<double> eigenvalues_imag;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double s_g = 1.0;
  double s_conservative = 1.0;
  double theta = 0.0;
  double max_demand = 0.0;
  /// Eigenvalues whose imaginary part exceeds 1e-6 of the spectral scale.
  int complex_flagged = 0;
  double max_abs_imag = 0.0;
  std::string method = "dense";
};

/// Eigen-decomposition of a dense K with step-size bounds.
SpectralReport spectral_analysis(const Eigen::MatrixXd& k, double theta, double max_demand,
                                 double j_norm_bound);

/// Nonzero spectrum of K through the |L|×|L| matrix −T' D S Dᵀ, padded with
/// zeros up to n. Used when n exceeds the number of links.
SpectralReport spectral_analysis_link_space(const FlowState& s, double j_norm_bound);

/// Exact ‖J‖ via the |L|×|L| matrix T'^{1/2} D Dᵀ T'^{1/2}.
double j_norm_exact(const JOperator& j);

struct JNormBound {
  double d_norm = 0.0;           // ‖D‖
  double tprime_amax_norm = 0.0; // ‖T'(a_max)‖, a_max = total demand on every link
  double bound = 0.0;            // ‖D‖² ‖T'(a_max)‖
};
JNormBound j_norm_upper_bound(const SueProblem& prob);

}  // namespace sue
