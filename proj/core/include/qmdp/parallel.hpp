#pragma once

#include <cstddef>
#include <functional>

namespace qmdp {

// Worker cap: QMDP_THREADS environment variable, 0 or unset = hardware count.
int worker_count();

// Runs fn(begin, end) over disjoint chunks of [0, n). Each index is processed
// by exactly one worker, so per-index pure writes need no synchronization.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace qmdp
