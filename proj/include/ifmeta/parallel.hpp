#pragma once

#include <cstddef>
#include <functional>

namespace ifmeta {

/// Number of worker threads to use for `requested`; 0 means all hardware
/// threads.
unsigned resolve_threads(unsigned requested);

/// Runs fn(begin, end) over contiguous chunks of [0, n), using at most
/// `threads` workers (0 = all cores). fn must only write to disjoint,
/// index-addressed outputs; chunk boundaries are deterministic but the
/// execution order is not.
void parallel_chunks(std::size_t n, unsigned threads,
                     const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace ifmeta
