#pragma once

#include <cstddef>
#include <functional>

namespace pathheat {

// Worker count used by parallel_for; 0 restores the hardware default.
void set_threads(int n);
int thread_count();

// Calls body(i) for i in [0, n). Work is split into contiguous blocks, so any
// per-index output slot is written by exactly one worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace pathheat
