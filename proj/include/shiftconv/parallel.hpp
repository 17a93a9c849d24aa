#pragma once

#include <cstddef>
#include <functional>

namespace shiftconv {

// Upper bound on worker threads used by library routines (default 1).
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n). Work is split into contiguous chunks; any
// reduction must be done by the caller over per-index results, so output is
// independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace shiftconv
