#pragma once

#include <cstddef>
#include <functional>

namespace cvmshift {

/// Number of worker threads to use; 0 picks the hardware concurrency.
std::size_t resolve_threads(std::size_t requested) noexcept;

/// Run fn(0) ... fn(n-1) on up to `threads` threads. Iterations must be
/// independent; results should be written to preallocated per-index slots
/// so the outcome is identical for any thread count. The first exception
/// thrown by a worker is rethrown on the calling thread.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace cvmshift
