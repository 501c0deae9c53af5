#pragma once

#include <cstddef>
#include <functional>

namespace lchomog {

/// Runs body(0) ... body(count - 1) on up to `threads` worker threads.
/// Indices are handed out in increasing order; the first exception thrown by
/// any body is rethrown after all workers have stopped.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Worker count: LC_HOMOG_THREADS if set to a positive integer, otherwise
/// `requested` if positive, otherwise the hardware concurrency.
int resolve_threads(int requested);

}  // namespace lchomog
