#include "logit_sue/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sue {

namespace {

std::atomic<int> g_override{0};

int env_threads() {
  const char* env = std::getenv("LOGIT_SUE_THREADS");
  if (env == nullptr) return 0;
  const int v = std::atoi(env);
  return v > 0 ? v : 0;
}

}  // namespace

int thread_limit() {
  if (const int o = g_override.load(); o > 0) return o;
  if (const int e = env_threads(); e > 0) return e;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void set_thread_limit(int threads) { g_override.store(std::max(0, threads)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(thread_limit()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  // Indices are claimed in increasing order, so keeping the lowest failing
  // index makes the rethrown error independent of the schedule.
  std::exception_ptr first_error;
  std::size_t first_index = n;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < first_index) {
          first_index = i;
          first_error = std::current_exception();
        }
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sue
