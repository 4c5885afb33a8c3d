#pragma once

#include <cstddef>
#include <functional>

namespace netdiff {

/// Worker count: NETDIFF_THREADS if set and positive, otherwise the hardware
/// concurrency (at least 1).
std::size_t default_threads();

/// Runs body(0..count-1) on up to `threads` workers (0 = default_threads()).
/// Work is handed out by index; callers write results into per-index slots so
/// the outcome does not depend on scheduling. The first exception thrown by
/// any body is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace netdiff
