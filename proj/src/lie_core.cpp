#include "lieopt/lie_core.hpp"

#include <cmath>
#include <random>
#include <string>

#include "lieopt/detail/group_math.hpp"
#include "lieopt/parallel.hpp"

namespace lieopt {

using namespace detail;

namespace {

constexpr std::size_t kGrain = 1024;

void require_algebra(Kind k, const char* op) {
  if (!is_algebra(k)) {
    throw InvalidKindError(std::string(op) + " expects an algebra kind, got " + std::string(to_string(k)));
  }
}

void require_group(Kind k, const char* op) {
  if (!is_group(k)) {
    throw InvalidKindError(std::string(op) + " expects a group kind, got " + std::string(to_string(k)));
  }
}

template <typename S>
void require_finite(std::span<const S> data, const char* op) {
  for (S v : data) {
    if (!std::isfinite(v)) throw DomainError(std::string(op) + ": non-finite input");
  }
}

template <typename S>
Vec3<S> vec3(const S* p) {
  return Vec3<S>(p[0], p[1], p[2]);
}

template <typename S>
void store(const Vec3<S>& v, S* p) {
  p[0] = v.x();
  p[1] = v.y();
  p[2] = v.z();
}

/// Unit quaternion of a group item, renormalized.
template <typename S>
Quat<S> rotation(Kind k, const S* item) {
  return quat_from_xyzw(item + quaternion_offset(k)).normalized();
}

template <typename S>
void exp_item(Kind k, const S* x, S* out) {
  switch (k) {
    case Kind::so3: quat_to_xyzw(so3_exp(vec3(x)), out); break;
    case Kind::se3: {
      Vec3<S> t;
      Quat<S> q;
      se3_exp(vec3(x), vec3(x + 3), t, q);
      store(t, out);
      quat_to_xyzw(q, out + 3);
      break;
    }
    case Kind::sim3: {
      const Vec3<S> phi = vec3(x + 3);
      const S sigma = x[6];
      store<S>(sim3_w_matrix(phi, sigma) * vec3(x), out);
      quat_to_xyzw(so3_exp(phi), out + 3);
      out[7] = std::exp(sigma);
      break;
    }
    case Kind::rxso3:
      quat_to_xyzw(so3_exp(vec3(x)), out);
      out[4] = std::exp(x[3]);
      break;
    default: break;
  }
}

template <typename S>
void log_item(Kind k, const S* g, S* out) {
  const Quat<S> q = rotation(k, g);
  switch (k) {
    case Kind::SO3: store(so3_log(q), out); break;
    case Kind::SE3: {
      Vec3<S> rho, phi;
      se3_log(vec3(g), q, rho, phi);
      store(rho, out);
      store(phi, out + 3);
      break;
    }
    case Kind::Sim3: {
      const Vec3<S> phi = so3_log(q);
      const S sigma = std::log(g[7]);
      const Mat3<S> W = sim3_w_matrix(phi, sigma);
      store<S>(W.partialPivLu().solve(vec3(g)), out);
      store(phi, out + 3);
      out[6] = sigma;
      break;
    }
    case Kind::RxSO3:
      store(so3_log(q), out);
      out[3] = std::log(g[4]);
      break;
    default: break;
  }
}

template <typename S>
void compose_item(Kind k, const S* a, const S* b, S* out) {
  const std::size_t qo = quaternion_offset(k);
  const Quat<S> qa = quat_from_xyzw(a + qo);
  const Quat<S> qb = quat_from_xyzw(b + qo);
  quat_to_xyzw<S>((qa * qb).normalized(), out + qo);
  switch (k) {
    case Kind::SE3: store<S>(vec3(a) + qa * vec3(b), out); break;
    case Kind::Sim3:
      store<S>(vec3(a) + a[7] * (qa * vec3(b)), out);
      out[7] = a[7] * b[7];
      break;
    case Kind::RxSO3: out[4] = a[4] * b[4]; break;
    default: break;
  }
}

template <typename S>
void inverse_item(Kind k, const S* g, S* out) {
  const std::size_t qo = quaternion_offset(k);
  const Quat<S> qi = quat_from_xyzw(g + qo).conjugate().normalized();
  quat_to_xyzw(qi, out + qo);
  switch (k) {
    case Kind::SE3: store<S>(-(qi * vec3(g)), out); break;
    case Kind::Sim3:
      out[7] = S(1) / g[7];
      store<S>(-(out[7] * (qi * vec3(g))), out);
      break;
    case Kind::RxSO3: out[4] = S(1) / g[4]; break;
    default: break;
  }
}

template <typename S>
Vec3<S> act_item(Kind k, const S* g, const Vec3<S>& p) {
  const Quat<S> q = quat_from_xyzw(g + quaternion_offset(k));
  switch (k) {
    case Kind::SO3: return q * p;
    case Kind::SE3: return q * p + vec3(g);
    case Kind::Sim3: return g[7] * (q * p) + vec3(g);
    case Kind::RxSO3: return g[4] * (q * p);
    default: return p;
  }
}

template <typename S>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> matrix_item(Kind k, const S* g) {
  const Mat3<S> R = quat_from_xyzw(g + quaternion_offset(k)).toRotationMatrix();
  switch (k) {
    case Kind::SO3: return R;
    case Kind::RxSO3: return g[4] * R;
    case Kind::SE3:
    case Kind::Sim3: {
      Mat4<S> T = Mat4<S>::Identity();
      T.template topLeftCorner<3, 3>() = k == Kind::Sim3 ? Mat3<S>(g[7] * R) : R;
      T.template topRightCorner<3, 1>() = vec3(g);
      return T;
    }
    default: return {};
  }
}

}  // namespace

template <typename S>
void check_group(const BasicLieBatch<S>& g) {
  require_group(g.kind(), "check_group");
  const Kind k = g.kind();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto item = g.item(i);
    for (S v : item) {
      if (!std::isfinite(v)) throw DomainError("element " + std::to_string(i) + " is not finite");
    }
    const S norm = quat_from_xyzw(item.data() + quaternion_offset(k)).norm();
    if (std::abs(norm - S(1)) > S(1e-3)) {
      throw CorruptElementError(i, "quaternion norm " + std::to_string(norm) + " is not unit");
    }
    if (has_scale(k) && !(item.back() > S(0))) {
      throw CorruptElementError(i, "scale must be positive");
    }
  }
}

template <typename S>
BasicLieBatch<S> exp_map(const BasicLieBatch<S>& x) {
  require_algebra(x.kind(), "exp_map");
  require_finite(x.data(), "exp_map");
  const Kind k = x.kind();
  BasicLieBatch<S> out(group_of(k), x.shape());
  parallel_for(x.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) exp_item(k, x.item(i).data(), out.item(i).data());
  }, kGrain);
  return out;
}

template <typename S>
BasicLieBatch<S> log_map(const BasicLieBatch<S>& g) {
  check_group(g);
  const Kind k = g.kind();
  BasicLieBatch<S> out(algebra_of(k), g.shape());
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) log_item(k, g.item(i).data(), out.item(i).data());
  }, kGrain);
  return out;
}

template <typename S>
BasicLieBatch<S> compose(const BasicLieBatch<S>& a, const BasicLieBatch<S>& b) {
  require_group(a.kind(), "compose");
  if (a.kind() != b.kind()) {
    throw InvalidKindError("compose: kind mismatch " + std::string(to_string(a.kind())) + " vs " +
                           std::string(to_string(b.kind())));
  }
  const Kind k = a.kind();
  if (a.shape() == b.shape()) {
    BasicLieBatch<S> out(k, a.shape());
    parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) compose_item(k, a.item(i).data(), b.item(i).data(), out.item(i).data());
    }, kGrain);
    return out;
  }
  const Shape shape = broadcast_shapes(a.shape(), b.shape());
  const auto ia = broadcast_index(a.shape(), shape);
  const auto ib = broadcast_index(b.shape(), shape);
  BasicLieBatch<S> out(k, shape);
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      compose_item(k, a.item(ia[i]).data(), b.item(ib[i]).data(), out.item(i).data());
    }
  }, kGrain);
  return out;
}

template <typename S>
BasicLieBatch<S> inverse(const BasicLieBatch<S>& g) {
  require_group(g.kind(), "inverse");
  const Kind k = g.kind();
  BasicLieBatch<S> out(k, g.shape());
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) inverse_item(k, g.item(i).data(), out.item(i).data());
  }, kGrain);
  return out;
}

template <typename S>
BasicPointBatch<S> act(const BasicLieBatch<S>& g, const BasicPointBatch<S>& p) {
  require_group(g.kind(), "act");
  const Shape shape = broadcast_shapes(g.shape(), p.shape());
  const auto ig = broadcast_index(g.shape(), shape);
  const auto ip = broadcast_index(p.shape(), shape);
  const Kind k = g.kind();
  BasicPointBatch<S> out(shape);
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      store(act_item(k, g.item(ig[i]).data(), vec3(p.item(ip[i]).data())), out.item(i).data());
    }
  }, kGrain);
  return out;
}

template <typename S>
std::vector<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>> to_matrix(const BasicLieBatch<S>& g) {
  require_group(g.kind(), "to_matrix");
  std::vector<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = matrix_item(g.kind(), g.item(i).data());
  return out;
}

template <typename S>
BasicLieBatch<S> identity(Kind kind, const Shape& shape) {
  BasicLieBatch<S> out(kind, shape);
  if (is_group(kind)) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      auto item = out.item(i);
      item[quaternion_offset(kind) + 3] = S(1);
      if (has_scale(kind)) item.back() = S(1);
    }
  }
  return out;
}

template <typename S>
BasicLieBatch<S> random_tangent(Kind kind, const Shape& shape, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw DomainError("random_tangent: sigma must be non-negative");
  BasicLieBatch<S> out(algebra_of(kind), shape);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (S& v : out.data()) v = static_cast<S>(sigma * normal(rng));
  return out;
}

template <typename S>
BasicLieBatch<S> random_group(Kind kind, const Shape& shape, double sigma, std::uint64_t seed) {
  return exp_map(random_tangent<S>(algebra_of(kind), shape, sigma, seed));
}

Eigen::Matrix3d hat(const Eigen::Vector3d& x) {
  if (!x.allFinite()) throw DomainError("hat: non-finite input");
  return detail::hat<double>(x);
}

Eigen::Matrix3d right_jacobian_so3(const Eigen::Vector3d& phi) {
  if (!phi.allFinite()) throw DomainError("right_jacobian_so3: non-finite input");
  return so3_right_jacobian<double>(phi);
}

#define LIEOPT_INSTANTIATE(S)                                                                         \
  template void check_group<S>(const BasicLieBatch<S>&);                                              \
  template BasicLieBatch<S> exp_map<S>(const BasicLieBatch<S>&);                                      \
  template BasicLieBatch<S> log_map<S>(const BasicLieBatch<S>&);                                      \
  template BasicLieBatch<S> compose<S>(const BasicLieBatch<S>&, const BasicLieBatch<S>&);             \
  template BasicLieBatch<S> inverse<S>(const BasicLieBatch<S>&);                                      \
  template BasicPointBatch<S> act<S>(const BasicLieBatch<S>&, const BasicPointBatch<S>&);             \
  template std::vector<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>> to_matrix<S>(                \
      const BasicLieBatch<S>&);                                                                       \
  template BasicLieBatch<S> identity<S>(Kind, const Shape&);                                          \
  template BasicLieBatch<S> random_tangent<S>(Kind, const Shape&, double, std::uint64_t);             \
  template BasicLieBatch<S> random_group<S>(Kind, const Shape&, double, std::uint64_t);

LIEOPT_INSTANTIATE(float)
LIEOPT_INSTANTIATE(double)

#undef LIEOPT_INSTANTIATE

}  // namespace lieopt
