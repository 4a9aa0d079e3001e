#pragma once

#include <cstddef>
#include <functional>

namespace sprt_exact {

/// Worker count: SPRT_EXACT_THREADS if set to a positive integer, otherwise
/// (unset or 0) the hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Every index
/// runs even if some throw; the exception of the lowest failing index is
/// rethrown afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sprt_exact
