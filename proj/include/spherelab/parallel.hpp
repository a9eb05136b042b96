#pragma once

#include <cstddef>
#include <functional>

namespace spherelab {

// Worker count: SPHERELAB_THREADS if set and positive, otherwise the
// hardware concurrency.
int worker_count();

// Runs body(i) for i in [0, count) across worker_count() threads. Each index
// is visited exactly once; the first exception thrown is rethrown after all
// workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace spherelab
