#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "lieopt/error.hpp"
#include "lieopt/kind.hpp"
#include "lieopt/shape.hpp"

namespace lieopt {

template <typename Scalar>
constexpr Precision precision_of() noexcept {
  static_assert(std::is_same_v<Scalar, float> || std::is_same_v<Scalar, double>);
  return std::is_same_v<Scalar, float> ? Precision::f32 : Precision::f64;
}

/// A batch of group elements or tangent vectors sharing one kind.
///
/// Items are stored contiguously, item_size(kind) scalars each. Quaternions
/// use (x,y,z,w) order; SE3 is (t, q), Sim3 is (t, q, s), RxSO3 is (q, s).
/// Tangent layouts are se3 = (rho, phi), sim3 = (rho, phi, sigma) and
/// rxso3 = (phi, sigma).
///
/// Construction does not validate group invariants. Operations that consume
/// group elements check them and every operation produces valid output.
template <typename Scalar>
class BasicLieBatch {
 public:
  using scalar_type = Scalar;

  BasicLieBatch(Kind kind, Shape shape)
      : kind_(kind), shape_(std::move(shape)), data_(element_count(shape_) * item_size(kind_)) {}

  BasicLieBatch(Kind kind, Shape shape, std::vector<Scalar> data)
      : kind_(kind), shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_) * item_size(kind_)) {
      throw ShapeError("buffer of " + std::to_string(data_.size()) + " scalars does not hold " +
                       std::to_string(element_count(shape_)) + " " + std::string(to_string(kind_)) +
                       " items");
    }
  }

  /// Single element from its scalars.
  BasicLieBatch(Kind kind, std::initializer_list<Scalar> item)
      : BasicLieBatch(kind, Shape{}, std::vector<Scalar>(item)) {}

  Kind kind() const noexcept { return kind_; }
  const Shape& shape() const noexcept { return shape_; }
  constexpr Precision precision() const noexcept { return precision_of<Scalar>(); }

  /// Number of items.
  std::size_t size() const noexcept { return data_.size() / item_size(kind_); }

  std::span<const Scalar> data() const noexcept { return data_; }
  std::span<Scalar> data() noexcept { return data_; }

  std::span<const Scalar> item(std::size_t i) const noexcept {
    return std::span<const Scalar>(data_).subspan(i * item_size(kind_), item_size(kind_));
  }
  std::span<Scalar> item(std::size_t i) noexcept {
    return std::span<Scalar>(data_).subspan(i * item_size(kind_), item_size(kind_));
  }

  friend bool operator==(const BasicLieBatch&, const BasicLieBatch&) = default;

 private:
  Kind kind_;
  Shape shape_;
  std::vector<Scalar> data_;
};

/// A batch of 3D points, (x,y,z) per item.
template <typename Scalar>
class BasicPointBatch {
 public:
  explicit BasicPointBatch(Shape shape) : shape_(std::move(shape)), data_(element_count(shape_) * 3) {}

  BasicPointBatch(Shape shape, std::vector<Scalar> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_) * 3) {
      throw ShapeError("point buffer size does not match shape");
    }
  }

  BasicPointBatch(std::initializer_list<Scalar> point) : BasicPointBatch(Shape{}, std::vector<Scalar>(point)) {}

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size() / 3; }
  std::span<const Scalar> data() const noexcept { return data_; }
  std::span<Scalar> data() noexcept { return data_; }
  std::span<const Scalar> item(std::size_t i) const noexcept {
    return std::span<const Scalar>(data_).subspan(i * 3, 3);
  }
  std::span<Scalar> item(std::size_t i) noexcept { return std::span<Scalar>(data_).subspan(i * 3, 3); }

  friend bool operator==(const BasicPointBatch&, const BasicPointBatch&) = default;

 private:
  Shape shape_;
  std::vector<Scalar> data_;
};

using LieBatch = BasicLieBatch<double>;
using LieBatchF = BasicLieBatch<float>;
using PointBatch = BasicPointBatch<double>;
using PointBatchF = BasicPointBatch<float>;

}  // namespace lieopt
