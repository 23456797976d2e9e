#pragma once

#include <cstddef>
#include <functional>

namespace dlab {

// Worker count: hardware concurrency capped by LAB_THREADS (if set, >= 1).
unsigned thread_count();

// Runs body(i) for i in [0, count). Results must be written to
// caller-owned slots indexed by i so that merging is order-independent.
// Nested calls from inside a worker run serially. The first exception
// thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace dlab
