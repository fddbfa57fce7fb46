#pragma once

#include <cstddef>
#include <functional>

namespace specrob {

// Worker cap: SPECROB_THREADS when set to a positive integer, otherwise the
// number of logical cores.
std::size_t worker_count();

// Runs fn(0..n-1) across worker threads. Work items must not depend on the
// order of execution. The exception from the lowest failing index is rethrown.
// Calls made from inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace specrob
