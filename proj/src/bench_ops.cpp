#include "lieopt/bench_ops.hpp"

#include "lieopt/detail/group_math.hpp"
#include "lieopt/lie_core.hpp"

namespace lieopt::bench {

template <typename S>
BasicLieBatch<S> f1(const BasicLieBatch<S>& x) {
  return log_map(exp_map(x));
}

template <typename S>
BasicLieBatch<S> f2(const BasicLieBatch<S>& x, const BasicLieBatch<S>& y) {
  return log_map(compose(exp_map(x), exp_map(y)));
}

template <typename S>
BasicPointBatch<S> f3(const BasicLieBatch<S>& x, const BasicPointBatch<S>& p) {
  return act(exp_map(x), p);
}

template LieBatch f1<double>(const LieBatch&);
template LieBatchF f1<float>(const LieBatchF&);
template LieBatch f2<double>(const LieBatch&, const LieBatch&);
template LieBatchF f2<float>(const LieBatchF&, const LieBatchF&);
template PointBatch f3<double>(const LieBatch&, const PointBatch&);
template PointBatchF f3<float>(const LieBatchF&, const PointBatchF&);

namespace {

Eigen::Vector3d at(std::span<const double> item) { return {item[0], item[1], item[2]}; }

LieBatch as_so3(const Eigen::VectorXd& v) {
  return LieBatch(Kind::so3, Shape{static_cast<std::size_t>(v.size() / 3)},
                  std::vector<double>(v.data(), v.data() + v.size()));
}

template <typename Batch>
Eigen::VectorXd flat(const Batch& b) {
  return Eigen::Map<const Eigen::VectorXd>(b.data().data(), static_cast<Eigen::Index>(b.data().size()));
}

}  // namespace

// Exp(x + d) = Exp(Jl(x) d) Exp(x) to first order, which gives all three.

std::vector<Eigen::Matrix3d> f1_jacobian(const LieBatch& x) {
  return std::vector<Eigen::Matrix3d>(x.size(), Eigen::Matrix3d::Identity());
}

std::vector<Eigen::Matrix3d> f2_jacobian(const LieBatch& x, const LieBatch& y) {
  const LieBatch z = f2(x, y);
  std::vector<Eigen::Matrix3d> out(z.size());
  const bool bx = x.size() == 1 && z.size() > 1;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Eigen::Vector3d xi = at(x.item(bx ? 0 : i));
    out[i] = detail::so3_left_jacobian_inverse<double>(at(z.item(i))) * detail::so3_left_jacobian<double>(xi);
  }
  return out;
}

std::vector<Eigen::Matrix3d> f3_jacobian(const LieBatch& x, const PointBatch& p) {
  const PointBatch q = f3(x, p);
  std::vector<Eigen::Matrix3d> out(q.size());
  const bool bx = x.size() == 1 && q.size() > 1;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Eigen::Vector3d xi = at(x.item(bx ? 0 : i));
    out[i] = -detail::hat<double>(at(q.item(i))) * detail::so3_left_jacobian<double>(xi);
  }
  return out;
}

ResidualFunction f1_function() {
  return [](const ParamSet& p) -> Eigen::VectorXd { return flat(f1(as_so3(p.vector(0)))); };
}

ResidualFunction f2_function(const LieBatch& y) {
  return [y](const ParamSet& p) -> Eigen::VectorXd { return flat(f2(as_so3(p.vector(0)), y)); };
}

ResidualFunction f3_function(const PointBatch& points) {
  return [points](const ParamSet& p) -> Eigen::VectorXd { return flat(f3(as_so3(p.vector(0)), points)); };
}

}  // namespace lieopt::bench
