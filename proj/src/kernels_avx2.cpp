// AVX2/FMA variants of the kernel table. Built with -mavx2 -mfma; only handed
// out after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "logit_sue/kernels.hpp"

namespace sue {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  for (; i + 4 <= n; i += 4) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sum_sq(const double* x, std::size_t n) { return dot(x, x, n); }

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpby(double a, const double* x, double b, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), by));
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void gather_sum(const int* ptr, const int* idx, const double* x, double* out, std::size_t rows) {
  for (std::size_t r = 0; r < rows; ++r) {
    int j = ptr[r];
    const int end = ptr[r + 1];
    double s = 0.0;
    if (end - j >= 8) {
      __m256d acc = _mm256_setzero_pd();
      for (; j + 4 <= end; j += 4) {
        const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + j));
        acc = _mm256_add_pd(acc, _mm256_i32gather_pd(x, vi, 8));
      }
      s = hsum(acc);
    }
    for (; j < end; ++j) s += x[idx[j]];
    out[r] = s;
  }
}

// exp(x) = 2^n * exp(r), n = round(x / ln 2), r reduced in two parts.
void vexp(const double* x, double* out, std::size_t n) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(0.693145751953125);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d lo_cut = _mm256_set1_pd(-708.0);
  const __m256d hi_cut = _mm256_set1_pd(709.78);
  const __m256d inf = _mm256_set1_pd(INFINITY);
  const __m256i bias = _mm256_set1_epi64x(1023);
  // Taylor coefficients 1/k!, k = 13 .. 0
  static const double c[] = {1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0,
                             1.0 / 3628800.0,    1.0 / 362880.0,    1.0 / 40320.0,
                             1.0 / 5040.0,       1.0 / 720.0,       1.0 / 120.0,
                             1.0 / 24.0,         1.0 / 6.0,         0.5,
                             1.0,                1.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d under = _mm256_cmp_pd(v, lo_cut, _CMP_LT_OQ);
    const __m256d over = _mm256_cmp_pd(v, hi_cut, _CMP_GT_OQ);
    const __m256d xc = _mm256_min_pd(_mm256_max_pd(v, lo_cut), hi_cut);
    const __m256d k =
        _mm256_round_pd(_mm256_mul_pd(xc, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, ln2_hi, xc);
    r = _mm256_fnmadd_pd(k, ln2_lo, r);
    __m256d p = _mm256_set1_pd(c[0]);
    for (int t = 1; t < 14; ++t) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[t]));
    // Split 2^k into two factors so k = 1024 does not overflow the exponent field.
    const __m128i k32 = _mm256_cvtpd_epi32(k);
    const __m128i k1_32 = _mm_srai_epi32(k32, 1);
    const __m256i k1 = _mm256_cvtepi32_epi64(k1_32);
    const __m256i k2 = _mm256_cvtepi32_epi64(_mm_sub_epi32(k32, k1_32));
    const __m256d s1 = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(k1, bias), 52));
    const __m256d s2 = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(k2, bias), 52));
    __m256d res = _mm256_mul_pd(_mm256_mul_pd(p, s1), s2);
    res = _mm256_blendv_pd(res, _mm256_setzero_pd(), under);
    res = _mm256_blendv_pd(res, inf, over);
    _mm256_storeu_pd(out + i, res);
  }
  for (; i < n; ++i) out[i] = x[i] < -708.0 ? 0.0 : std::exp(x[i]);
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2", dot, sum_sq, axpy, axpby, mul, gather_sum, vexp};
  return table;
}

}  // namespace sue
