#pragma once

#include <cstdint>
#include <functional>

namespace cbp {

// Worker count used by parallel loops: an explicit request > 0 wins, else the
// CBP_THREADS environment variable, else std::thread::hardware_concurrency.
int resolve_threads(int requested);

// Runs fn(i) for every i in [0, n), split into contiguous index blocks across
// at most n_threads workers. Callers must write any outputs into pre-sized
// per-index slots so results cannot depend on scheduling. If workers throw,
// the exception from the lowest-indexed block is rethrown after all join.
void parallel_for(std::int64_t n, int n_threads,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace cbp
