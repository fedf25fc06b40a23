#include <atomic>
#include <cstdlib>
#include <cstring>

#include "logit_sue/kernels.hpp"

namespace sue {

#ifdef LOGIT_SUE_HAVE_AVX2
const KernelTable& avx2_kernel_table();
#endif

namespace {

std::atomic<bool> g_force_scalar{false};

const KernelTable& detect() {
  const char* env = std::getenv("LOGIT_SUE_KERNELS");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return scalar_kernels();
  if (const auto* t = avx2_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable* avx2_kernels() {
#ifdef LOGIT_SUE_HAVE_AVX2
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& kernels() {
  if (g_force_scalar.load(std::memory_order_relaxed)) return scalar_kernels();
  static const KernelTable& chosen = detect();
  return chosen;
}

void force_scalar_kernels(bool on) { g_force_scalar.store(on); }

}  // namespace sue
