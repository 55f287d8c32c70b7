#pragma once

#include <cstddef>
#include <string_view>

namespace lieopt {

/// Transformation family tag. Group kinds pair with algebra kinds:
/// SO3<->so3, SE3<->se3, Sim3<->sim3, RxSO3<->rxso3.
enum class Kind { SO3, so3, SE3, se3, Sim3, sim3, RxSO3, rxso3 };

enum class Precision { f32, f64 };

constexpr bool is_group(Kind k) noexcept {
  return k == Kind::SO3 || k == Kind::SE3 || k == Kind::Sim3 || k == Kind::RxSO3;
}

constexpr bool is_algebra(Kind k) noexcept { return !is_group(k); }

/// Scalars stored per item.
constexpr std::size_t item_size(Kind k) noexcept {
  switch (k) {
    case Kind::SO3: return 4;
    case Kind::so3: return 3;
    case Kind::SE3: return 7;
    case Kind::se3: return 6;
    case Kind::Sim3: return 8;
    case Kind::sim3: return 7;
    case Kind::RxSO3: return 5;
    case Kind::rxso3: return 4;
  }
  return 0;
}

/// Degrees of freedom, i.e. the item size of the paired algebra kind.
constexpr std::size_t tangent_size(Kind k) noexcept {
  switch (k) {
    case Kind::SO3:
    case Kind::so3: return 3;
    case Kind::SE3:
    case Kind::se3: return 6;
    case Kind::Sim3:
    case Kind::sim3: return 7;
    case Kind::RxSO3:
    case Kind::rxso3: return 4;
  }
  return 0;
}

constexpr Kind algebra_of(Kind k) noexcept {
  switch (k) {
    case Kind::SO3: return Kind::so3;
    case Kind::SE3: return Kind::se3;
    case Kind::Sim3: return Kind::sim3;
    case Kind::RxSO3: return Kind::rxso3;
    default: return k;
  }
}

constexpr Kind group_of(Kind k) noexcept {
  switch (k) {
    case Kind::so3: return Kind::SO3;
    case Kind::se3: return Kind::SE3;
    case Kind::sim3: return Kind::Sim3;
    case Kind::rxso3: return Kind::RxSO3;
    default: return k;
  }
}

/// Offset of the (x,y,z,w) quaternion inside a group item.
constexpr std::size_t quaternion_offset(Kind k) noexcept {
  return (k == Kind::SE3 || k == Kind::Sim3) ? 3 : 0;
}

constexpr bool has_scale(Kind k) noexcept { return k == Kind::Sim3 || k == Kind::RxSO3; }

constexpr std::string_view to_string(Kind k) noexcept {
  switch (k) {
    case Kind::SO3: return "SO3";
    case Kind::so3: return "so3";
    case Kind::SE3: return "SE3";
    case Kind::se3: return "se3";
    case Kind::Sim3: return "Sim3";
    case Kind::sim3: return "sim3";
    case Kind::RxSO3: return "RxSO3";
    case Kind::rxso3: return "rxso3";
  }
  return "?";
}

}  // namespace lieopt
