#pragma once

#include <cstddef>
#include <string_view>

namespace sue {

/// Dense and sparse inner loops. The scalar table is the reference; the AVX2
/// table must agree with it to rounding.
struct KernelTable {
  std::string_view name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  /// y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// y = a * x + b * y
  void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
  /// out = x .* y
  void (*mul)(const double* x, const double* y, double* out, std::size_t n);
  /// out[r] = sum of x[idx[j]] for j in [ptr[r], ptr[r+1])
  void (*gather_sum)(const int* ptr, const int* idx, const double* x, double* out,
                     std::size_t rows);
  /// out = exp(x); inputs below -708 give exactly 0.
  void (*exp)(const double* x, double* out, std::size_t n);
};

const KernelTable& scalar_kernels();
/// Null when the build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// Active table: AVX2 when available unless LOGIT_SUE_KERNELS=scalar.
const KernelTable& kernels();
/// Pins the active table to the scalar reference (deterministic runs).
void force_scalar_kernels(bool on);

}  // namespace sue
