#pragma once

#include <cstddef>
#include <functional>

namespace alle {

/// Worker count: ALLE_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Overrides the worker count for the current process; 0 restores the
/// environment/hardware default.
void set_worker_count(std::size_t workers);

/// Runs body(i) for i in [0, n). Work items must write only to their own
/// slot so the result does not depend on scheduling. The first exception
/// thrown by any item is rethrown after all workers have joined.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace alle
