#pragma once

#include <cstddef>
#include <functional>

namespace mlr {

/// Runs job(i) for i in [0, count) on up to `workers` threads. Each job owns
/// its output slot, so results never depend on completion order. The first
/// exception thrown by a job is rethrown after all workers join.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job);

}  // namespace mlr
