#pragma once

#include <cstddef>
#include <functional>

namespace mvb {

/// Runs body(0..count-1) on up to `threads` workers. Each index is executed
/// exactly once; if any body throws, the exception of the lowest failing
/// index is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

/// Worker count used when the caller passes 0.
unsigned default_threads() noexcept;

}  // namespace mvb
