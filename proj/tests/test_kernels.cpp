#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "logit_sue/kernels.hpp"

using namespace sue;

namespace {

std::vector<double> randv(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 31, 64, 100, 1001};

}  // namespace

TEST_CASE("scalar kernels on small examples") {
  const auto& k = scalar_kernels();
  const double x[] = {1, 2, 3};
  double y[] = {4, 5, 6};
  CHECK(k.dot(x, y, 3) == 32.0);
  CHECK(k.sum_sq(x, 3) == 14.0);
  k.axpy(2.0, x, y, 3);
  CHECK(y[2] == 12.0);
  k.axpby(1.0, x, 0.5, y, 3);
  CHECK(y[0] == 4.0);
  double out[3];
  k.mul(x, x, out, 3);
  CHECK(out[2] == 9.0);
  const int ptr[] = {0, 2, 3};
  const int idx[] = {0, 2, 1};
  k.gather_sum(ptr, idx, x, out, 2);
  CHECK(out[0] == 4.0);
  CHECK(out[1] == 2.0);
  const double e[] = {0.0, -709.0, 1.0};
  k.exp(e, out, 3);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const KernelTable* v = avx2_kernels();
  if (v == nullptr) {
    MESSAGE("AVX2 unavailable; only the scalar table is exercised");
    return;
  }
  const auto& s = scalar_kernels();
  std::mt19937_64 rng(5);
  for (const std::size_t n : kSizes) {
    CAPTURE(n);
    const auto x = randv(rng, n);
    const auto y = randv(rng, n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y[i]);
    CHECK(std::abs(v->dot(x.data(), y.data(), n) - s.dot(x.data(), y.data(), n)) <=
          1e-14 * (scale + 1.0));
    CHECK(v->sum_sq(x.data(), n) ==
          doctest::Approx(s.sum_sq(x.data(), n)).epsilon(1e-14).scale(1.0));

    auto ya = y, yb = y;
    v->axpy(0.3, x.data(), ya.data(), n);
    s.axpy(0.3, x.data(), yb.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(ya[i] == doctest::Approx(yb[i]).epsilon(1e-15));

    ya = y;
    yb = y;
    v->axpby(0.3, x.data(), -1.7, ya.data(), n);
    s.axpby(0.3, x.data(), -1.7, yb.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(ya[i] == doctest::Approx(yb[i]).epsilon(1e-15));

    std::vector<double> ma(n), mb(n);
    v->mul(x.data(), y.data(), ma.data(), n);
    s.mul(x.data(), y.data(), mb.data(), n);
    CHECK(ma == mb);
  }
}

TEST_CASE("avx2 gather matches scalar") {
  const KernelTable* v = avx2_kernels();
  if (v == nullptr) return;
  const auto& s = scalar_kernels();
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t cols = 1 + rng() % 200;
    const std::size_t rows = rng() % 60;
    const auto x = randv(rng, cols);
    std::vector<int> ptr{0}, idx;
    for (std::size_t r = 0; r < rows; ++r) {
      const int len = static_cast<int>(rng() % 13);
      for (int j = 0; j < len; ++j) idx.push_back(static_cast<int>(rng() % cols));
      ptr.push_back(static_cast<int>(idx.size()));
    }
    std::vector<double> a(rows), b(rows);
    v->gather_sum(ptr.data(), idx.data(), x.data(), a.data(), rows);
    s.gather_sum(ptr.data(), idx.data(), x.data(), b.data(), rows);
    for (std::size_t r = 0; r < rows; ++r) CHECK(a[r] == doctest::Approx(b[r]).epsilon(1e-14).scale(1.0));
  }
}

TEST_CASE("avx2 exp matches the scalar exp to a few ulp") {
  const KernelTable* v = avx2_kernels();
  if (v == nullptr) return;
  const auto& s = scalar_kernels();
  std::mt19937_64 rng(9);
  for (const std::size_t n : kSizes) {
    auto x = randv(rng, n, -745.0, 700.0);
    std::vector<double> a(n), b(n);
    v->exp(x.data(), a.data(), n);
    s.exp(x.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CAPTURE(x[i]);
      if (b[i] == 0.0) {
        CHECK(a[i] == 0.0);
      } else {
        CHECK(std::abs(a[i] - b[i]) <= 4e-16 * b[i]);
      }
    }
  }
  const std::vector<double> edge{0.0, -708.0, -708.5, -1000.0, 1e-300, -1e-300, 709.0, 1.0, -1.0};
  std::vector<double> a(edge.size()), b(edge.size());
  v->exp(edge.data(), a.data(), edge.size());
  s.exp(edge.data(), b.data(), edge.size());
  for (std::size_t i = 0; i < edge.size(); ++i) {
    CAPTURE(edge[i]);
    CHECK(std::abs(a[i] - b[i]) <= 4e-16 * b[i]);
  }
  CHECK(a[0] == 1.0);
  CHECK(a[2] == 0.0);
  CHECK(a[3] == 0.0);
}
