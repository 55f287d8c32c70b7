#pragma once

#include <cstddef>
#include <vector>

namespace lieopt {

/// Batch dimensions. An empty shape holds a single element.
using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape) noexcept;

/// Trailing-dimension broadcast; throws ShapeError when a pair of dims differ
/// and neither is 1.
Shape broadcast_shapes(const Shape& a, const Shape& b);

/// For every linear index of `out`, the linear index into `in` that
/// broadcasting reads from. `in` must broadcast to `out`.
std::vector<std::size_t> broadcast_index(const Shape& in, const Shape& out);

}  // namespace lieopt
