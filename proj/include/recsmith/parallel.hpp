#pragma once

#include <cstddef>
#include <functional>

namespace recsmith {

/// Caps the number of worker threads used by parallel_for.
/// 0 restores the default (hardware concurrency). Thread-compatible: set it
/// once at startup (the CLI does this from --threads / RECSMITH_THREADS).
void set_max_threads(std::size_t n);
std::size_t max_threads();

/// Runs fn(i) for i in [begin, end) on up to max_threads() workers.
/// Work is handed out in contiguous blocks; callers must only write to
/// disjoint per-index slots, which keeps results identical for any worker
/// count. Runs inline when the range is small or one thread is allowed.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn);

}  // namespace recsmith
