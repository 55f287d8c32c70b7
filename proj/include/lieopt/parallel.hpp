#pragma once

#include <cstddef>
#include <functional>

namespace lieopt {

/// Number of worker threads used by batched sections. 1 means fully serial.
void set_num_threads(std::size_t n);
std::size_t num_threads();

/// Runs body(begin, end) over disjoint chunks of [0, n). Chunks never share
/// an index, so elementwise work gives the same bits for any thread count.
/// Calls made from inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 256);

}  // namespace lieopt
