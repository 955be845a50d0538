#pragma once

#include <cstddef>
#include <functional>

namespace pspin {

/// Worker count: PSPIN_THREADS if set and positive, else hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n) across worker threads. Iterations must be
/// independent; the first exception thrown by any iteration is rethrown.
/// Calls made from inside a worker run serially on that worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace pspin
