#pragma once

#include <cstddef>
#include <functional>

namespace foliate {

// Worker cap shared by every parallel loop. 0 means hardware concurrency.
void set_max_threads(unsigned n);
unsigned max_threads();

// Runs fn(i) for i in [0, n). Chunks are contiguous; fn must only write
// to disjoint outputs. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace foliate
