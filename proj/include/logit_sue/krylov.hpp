#pragma once

#include <functional>
#include <span>
#include <vector>

namespace sue {

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct GmresResult {
  std::vector<double> solution;
  /// ‖A x − b‖ / ‖b‖ recomputed from x at exit.
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Least-squares residual estimate after each Arnoldi step, relative to ‖b‖.
  std::vector<double> residual_history;
};

struct GmresOptions {
  double tol = 1e-10;
  int max_dim = 200;
  int max_restarts = 5;
};

/// GMRES from the zero vector with modified Gram-Schmidt (one selective
/// reorthogonalization pass) and Givens rotations. Restarts only when max_dim
/// is exhausted.
GmresResult gmres(const LinearOperator& apply, std::span<const double> b, const GmresOptions& opt);
GmresResult gmres(const LinearOperator& apply, std::span<const double> b, double tol, int max_dim);

}  // namespace sue
