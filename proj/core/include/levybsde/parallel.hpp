#pragma once

#include <cstddef>
#include <functional>

namespace levybsde {

/// Worker cap used when a caller passes threads <= 0. Defaults to the
/// hardware concurrency.
void set_default_threads(int threads);
int default_threads();

/// Runs body(begin, end) over contiguous chunks of [0, count). Chunk
/// boundaries depend only on count and the thread count; results written
/// by index are therefore independent of scheduling.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace levybsde
