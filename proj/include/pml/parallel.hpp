#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace pml {

/// Worker count: explicit request if nonzero, else PML_THREADS, else the
/// number of logical cores.
unsigned resolve_thread_count(unsigned requested);

/// Runs body(chunk) for chunk in [0, n_chunks) on up to `threads` workers.
/// Chunks are independent; the caller owns the mapping from chunk to work, so
/// results never depend on the worker count.
void parallel_for(std::size_t n_chunks, unsigned threads,
                  const std::function<void(std::size_t)>& body);

/// Pairwise (cascade) summation with a fixed recursion tree: the split
/// points depend only on the length, never on the worker count.
double pairwise_sum(std::span<const double> values);

/// Same tree as pairwise_sum; the top subtrees are evaluated concurrently.
double parallel_pairwise_sum(std::span<const double> values, unsigned threads);

}  // namespace pml
