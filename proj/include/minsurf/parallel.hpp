#pragma once

#include <cstddef>
#include <functional>

namespace minsurf {

/// Worker count used by the data-parallel loops (default: 1).
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls body(i) for i in [0, n), split into contiguous chunks over the
/// configured worker threads. Callers write results into per-index slots and
/// reduce them afterwards in index order, so results do not depend on the
/// thread count. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace minsurf
