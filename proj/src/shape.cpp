#include "lieopt/shape.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>

#include "lieopt/error.hpp"

namespace lieopt {

namespace {

std::string describe(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

}  // namespace

std::size_t element_count(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Shape broadcast_shapes(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw ShapeError("shapes " + describe(a) + " and " + describe(b) + " do not broadcast");
    }
    out[i] = da == 1 ? db : da;
  }
  return out;
}

std::vector<std::size_t> broadcast_index(const Shape& in, const Shape& out) {
  const std::size_t count = element_count(out);
  std::vector<std::size_t> index(count);
  if (in == out) {
    std::iota(index.begin(), index.end(), std::size_t{0});
    return index;
  }
  if (element_count(in) == 1) return index;  // all zeros
  if (broadcast_shapes(in, out) != out) {
    throw ShapeError("shape " + describe(in) + " does not broadcast to " + describe(out));
  }

  // Row-major strides of `in`, aligned to the trailing dims of `out`, with
  // zero stride along broadcast dimensions.
  const std::size_t rank = out.size();
  std::vector<std::size_t> stride(rank, 0);
  std::size_t s = 1;
  for (std::size_t k = 0; k < in.size(); ++k) {
    const std::size_t dim = in.size() - 1 - k;
    const std::size_t od = rank - 1 - k;
    stride[od] = in[dim] == 1 ? 0 : s;
    s *= in[dim];
  }
  std::vector<std::size_t> counter(rank, 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t src = 0;
    for (std::size_t d = 0; d < rank; ++d) src += counter[d] * stride[d];
    index[i] = src;
    for (std::size_t d = rank; d-- > 0;) {
      if (++counter[d] < out[d]) break;
      counter[d] = 0;
    }
  }
  return index;
}

}  // namespace lieopt
