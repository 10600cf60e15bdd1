#pragma once

#include <cstddef>
#include <functional>

namespace plasma_spike {

/// Global worker cap (--threads / PLASMA_SPIKE_THREADS). 0 or unset means
/// hardware concurrency.
void set_thread_cap(int threads);
int thread_cap();

/// Runs body(i) for i in [0, count) on up to `threads` workers (0: global cap).
/// Each index is processed exactly once; callers write results by index so the
/// outcome does not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace plasma_spike
