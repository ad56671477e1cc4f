#pragma once

#include <cstddef>
#include <functional>

namespace momeq {

/// Calls `body(i)` exactly once for every i in [0, count) using up to
/// `threads` workers (0 or 1 runs inline). Callers write results into
/// slots keyed by `i`, so outputs never depend on the worker count.
///
/// If any call throws, the exception raised by the lowest index is
/// rethrown after all workers have stopped.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace momeq
