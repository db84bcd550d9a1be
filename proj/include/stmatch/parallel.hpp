#pragma once

#include <functional>

namespace stmatch {

/// Worker count: STMATCH_THREADS if set to a positive integer, else hardware concurrency.
int thread_count();

/// Runs body(k) for k in [0, count). Work is split into caller-defined chunks, so any
/// reduction the caller performs over per-chunk results in index order is independent of
/// the number of threads.
void parallel_for(int count, const std::function<void(int)>& body);

/// Fixed chunk count for a loop of the given size; never depends on the thread count.
inline int chunk_count(int size, int max_chunks = 64) {
  if (size <= 0) return 0;
  return size < max_chunks ? size : max_chunks;
}

}  // namespace stmatch
