#pragma once

#include <cstddef>
#include <functional>

namespace cgp {

/// Runs task(0) ... task(count - 1) on up to `threads` workers. Each task must
/// write only to its own output slot; results are then independent of the
/// worker count. The first exception thrown by a task is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

/// Worker count from the CGP_THREADS environment variable, else the hardware
/// concurrency (at least 1).
int default_thread_count();

}  // namespace cgp
