#pragma once

#include <cstddef>
#include <functional>

namespace heliotower {

/// Worker count: hardware concurrency capped by HELIOTOWER_THREADS.
std::size_t worker_count() noexcept;

/// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each,
/// one chunk per worker. Chunk boundaries depend only on n and the worker
/// count, so callers writing to disjoint slots get deterministic results.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace heliotower
