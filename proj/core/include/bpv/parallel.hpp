#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace bpv {

// Runs fn(i) for every i in [0, n) on up to `threads` workers. fn must be
// safe to call concurrently for distinct indices. The first exception thrown
// by any invocation is rethrown after all workers join.
void parallel_for(std::size_t n, std::uint32_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace bpv
