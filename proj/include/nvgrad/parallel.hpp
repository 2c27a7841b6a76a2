#pragma once

#include <cstddef>
#include <functional>

namespace nvgrad {

/// Worker count: NVGRAD_THREADS if set to a positive integer, else hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Work is handed out
/// by index so results written by index are schedule independent. The first
/// exception thrown by any worker is rethrown after all workers have stopped.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nvgrad
