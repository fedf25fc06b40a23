#include <cmath>

#include "logit_sue/kernels.hpp"

namespace sue {

namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sum_sq(const double* x, std::size_t n) { return dot(x, x, n); }

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby(double a, const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void gather_sum(const int* ptr, const int* idx, const double* x, double* out, std::size_t rows) {
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int j = ptr[r]; j < ptr[r + 1]; ++j) s += x[idx[j]];
    out[r] = s;
  }
}

void vexp(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] < -708.0 ? 0.0 : std::exp(x[i]);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", dot, sum_sq, axpy, axpby, mul, gather_sum, vexp};
  return table;
}

}  // namespace sue
