#pragma once

#include <cstddef>
#include <functional>

namespace hessiansys {

/// Worker count: HESSIANSYS_THREADS if set and positive, else the hardware
/// concurrency, never below 1.
int thread_count();

/// Calls body(i) for i in [0, count), split into contiguous chunks over
/// thread_count() threads. body must only write to slots owned by i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace hessiansys
