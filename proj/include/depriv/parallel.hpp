#pragma once

// Deterministic reduction helpers. Every reduction in the pipeline goes
// through the fixed pairwise-summation tree below, so sums are bit-identical
// regardless of how many OpenMP workers produced the summands.

#include <cstddef>
#include <span>

namespace depriv {

// Pairwise summation with a fixed split structure (midpoint recursion,
// leaves of <= 16 elements summed left to right). The tree depends only on
// the input length, never on thread count.
double pairwise_sum(std::span<const double> values);

// Number of OpenMP threads the process will use (1 when built without OpenMP).
int worker_count();

// Clamp the OpenMP thread pool; no-op without OpenMP.
void set_worker_count(int n);

}  // namespace depriv
