#pragma once

#include <cstddef>
#include <functional>

namespace rsnet {

/// Runs fn over [0, count) split into contiguous blocks, one per worker.
/// workers == 0 means one block per hardware thread. The split depends only
/// on (count, workers), so writers to disjoint slots stay deterministic.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace rsnet
