// SPDX-License-Identifier: MIT
/**
 * @file parallel.hpp
 * @brief Index-parallel loop over a fixed worker pool.
 *
 * Worker count is min(hardware threads, FELLERLAB_THREADS) when the variable
 * is set. Callers write results by index, so output never depends on the
 * worker count.
 */

#pragma once

#include <cstdint>
#include <functional>

namespace fellerlab {

unsigned worker_count();

/// Calls body(i) for every i in [0, count). The first exception thrown by a worker is rethrown.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& body);

}  // namespace fellerlab
