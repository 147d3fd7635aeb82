#pragma once

#include <cstddef>
#include <functional>

namespace wavesrc {

/// Splits [0, n) into `threads` contiguous chunks and runs `body(begin, end)`
/// on each, the first chunk on the calling thread. threads <= 1 runs inline.
/// Callers only write disjoint outputs from each chunk, so results never
/// depend on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& body);

/// Hardware concurrency, at least 1.
int default_threads();

}  // namespace wavesrc
