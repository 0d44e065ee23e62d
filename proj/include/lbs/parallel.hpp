#pragma once

#include <cstddef>
#include <functional>

namespace lbs {

// Global cap on worker threads used by the parallel loops below.
// 0 means "use hardware concurrency". Thread-safe to set at startup;
// not meant to be flipped mid-computation.
void set_max_threads(int n);
int max_threads();

// Splits [0, count) into contiguous ranges and runs fn(begin, end) on each,
// possibly from worker threads. Callers must only write to per-index slots
// so the result is identical for any thread count.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& fn);

// Same, but the ranges are fixed-size blocks independent of the thread
// count: fn(block_index, begin, end) with end - begin <= block. Use for
// parallel reductions that must stay bitwise reproducible: accumulate one
// partial per block, then combine the partials in block order.
void parallel_for_blocks(std::size_t count, std::size_t block,
                         const std::function<void(std::size_t, std::size_t,
                                                  std::size_t)>& fn);

}  // namespace lbs
