#pragma once

#include <cstddef>
#include <functional>

namespace sue {

/// Worker count: LOGIT_SUE_THREADS when set, else hardware concurrency.
int thread_limit();

/// Overrides thread_limit() for the rest of the process (1 = sequential).
void set_thread_limit(int threads);

/// Runs fn(i) for i in [0, n). Each index must write only its own output slot,
/// so results do not depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace sue
