#pragma once

#include <cstddef>
#include <functional>

namespace polyfix {

// Number of worker threads to use: min(hardware, POLYFIX_THREADS if set).
// POLYFIX_THREADS=1 forces sequential execution.
int worker_count();

// Runs fn(i) for i in [0, count). Work items must be independent; results
// should be written to preallocated per-index slots so the outcome does not
// depend on scheduling. Exceptions thrown by fn are rethrown (first index
// wins) after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace polyfix
