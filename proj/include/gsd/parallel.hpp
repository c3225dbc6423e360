#pragma once

#include <cstddef>
#include <functional>

namespace gsd {

/// Worker count for internal loops: hardware concurrency, capped by the
/// GSD_THREADS environment variable when set to a positive integer.
std::size_t thread_count();

/// Calls fn(i) for i in [begin, end) over contiguous chunks on up to
/// thread_count() threads. fn must only write state owned by index i.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn);

}  // namespace gsd
