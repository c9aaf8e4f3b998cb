#pragma once

#include <cstddef>
#include <functional>

namespace surfcomp {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// visited exactly once; the first exception thrown by any body is rethrown
/// after all threads join. workers == 0 means hardware concurrency.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

std::size_t default_workers();

}  // namespace surfcomp
