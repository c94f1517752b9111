#pragma once

#include <cstddef>
#include <functional>

namespace qgs {

// Worker count: QGS_THREADS if set to a positive integer, else the hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n); the first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qgs
