#pragma once

#include <cstddef>
#include <functional>

namespace ddmr {

/// Worker count: DDMR_THREADS if set and positive, else hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() threads.
/// Bodies must write to disjoint outputs; the first exception is rethrown
/// after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace ddmr
