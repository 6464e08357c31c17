#pragma once

#include <cstddef>
#include <functional>

namespace hyperdet {

// Worker bound used when a call site passes threads = 0. Set once by the CLI.
void set_default_threads(int threads);
int default_threads();

// Runs fn(i) for every i in [0, n) on up to `threads` workers (0 = default bound).
// Indices are split into contiguous blocks. Callers must write results into
// disjoint slots keyed by i so the outcome is independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace hyperdet
