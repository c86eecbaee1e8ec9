#pragma once

#include <cstddef>
#include <functional>

namespace repsim {

/// Worker cap: min(hardware concurrency, REPSIM_THREADS when set). At least 1.
std::size_t max_threads();

/// Runs fn(0) .. fn(count - 1), possibly in parallel. Each index is executed
/// exactly once; callers must write results into per-index slots to stay
/// deterministic. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace repsim
