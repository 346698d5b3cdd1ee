#pragma once

#include <cstddef>
#include <functional>

namespace spclab {

/// Worker cap: SPCLAB_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
std::size_t max_threads();

/// Runs body(i) for i in [0, n). Each index writes only its own output slot,
/// so results do not depend on scheduling. The first exception (lowest index)
/// is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace spclab
