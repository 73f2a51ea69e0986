#pragma once

#include <cstddef>
#include <functional>

namespace membrane {

// Caps worker threads used by parallel_for; n <= 0 restores the hardware default.
void set_max_threads(int n);
int max_threads();

// Runs body(i) for i in [0, n). Each index is executed exactly once; callers write
// results into per-index slots so output does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace membrane
