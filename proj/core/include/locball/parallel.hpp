#pragma once

#include <cstddef>
#include <functional>

namespace locball {

/// Worker count: hardware concurrency capped by the LOCBALL_THREADS
/// environment variable (when set to a positive integer).
std::size_t worker_count();

/// Runs body(i) for every i in [0, count). Indices are distributed over the
/// workers in contiguous blocks; callers write results by index, so output
/// does not depend on the number of workers. The first exception thrown by
/// any body is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace locball
