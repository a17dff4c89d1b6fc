#pragma once

#include <cstddef>
#include <functional>

namespace magband {

// Worker count: hardware concurrency, capped by BUTTERFLY_THREADS when set.
unsigned worker_count();

// Runs body(i) for i in [0, n) across worker_count() threads. Each index is
// visited exactly once; callers write results into index-addressed slots so
// output never depends on scheduling. The first exception thrown by any
// worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace magband
