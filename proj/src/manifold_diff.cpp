#include "lieopt/manifold_diff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lieopt/detail/group_math.hpp"
#include "lieopt/lie_core.hpp"
#include "lieopt/parallel.hpp"

namespace lieopt {

namespace {

const double kCbrtEps = std::cbrt(std::numeric_limits<double>::epsilon());

Eigen::Index param_dim(const Param& p) {
  if (const auto* g = std::get_if<LieBatch>(&p)) {
    return static_cast<Eigen::Index>(g->size() * tangent_size(g->kind()));
  }
  return std::get<Eigen::VectorXd>(p).size();
}

void check_finite(const Eigen::VectorXd& r, std::size_t probe) {
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (!std::isfinite(r[i])) {
      throw EvaluationError(probe, "residual entry " + std::to_string(i) + " is not finite at probe");
    }
  }
}

/// Left-perturbs one group item in place.
void perturb_item(LieBatch& g, std::size_t item, const double* delta) {
  const Kind k = g.kind();
  const std::size_t dof = tangent_size(k);
  LieBatch step(algebra_of(k), Shape{}, std::vector<double>(delta, delta + dof));
  LieBatch current(k, Shape{}, std::vector<double>(g.item(item).begin(), g.item(item).end()));
  const LieBatch moved = compose(exp_map(step), current);
  std::copy(moved.data().begin(), moved.data().end(), g.item(item).begin());
}

}  // namespace

ParamSet::ParamSet(std::vector<Param> params) {
  for (auto& p : params) add(std::move(p));
}

void ParamSet::add(Param p) {
  if (const auto* g = std::get_if<LieBatch>(&p)) {
    if (!is_group(g->kind())) throw InvalidKindError("ParamSet: batch parameters must be group kinds");
  }
  params_.push_back(std::move(p));
}

Eigen::Index ParamSet::tangent_dim() const noexcept {
  Eigen::Index n = 0;
  for (const auto& p : params_) n += param_dim(p);
  return n;
}

Eigen::Index ParamSet::tangent_dim(std::size_t i) const { return param_dim(params_.at(i)); }

Eigen::Index ParamSet::offset(std::size_t i) const {
  Eigen::Index n = 0;
  for (std::size_t k = 0; k < i; ++k) n += param_dim(params_.at(k));
  return n;
}

ParamSet retract(const ParamSet& p, const Eigen::Ref<const Eigen::VectorXd>& delta) {
  if (delta.size() != p.tangent_dim()) {
    throw ShapeError("retract: delta has " + std::to_string(delta.size()) + " entries, expected " +
                     std::to_string(p.tangent_dim()));
  }
  ParamSet out = p;
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (auto* g = std::get_if<LieBatch>(&out[i])) {
      const Kind k = g->kind();
      const std::size_t dof = tangent_size(k);
      const auto seg = delta.segment(off, static_cast<Eigen::Index>(g->size() * dof));
      if ((seg.array() == 0.0).all()) {  // keep the stored bits
        off += seg.size();
        continue;
      }
      LieBatch step(algebra_of(k), g->shape(),
                    std::vector<double>(delta.data() + off, delta.data() + off + g->size() * dof));
      *g = compose(exp_map(step), *g);
      off += static_cast<Eigen::Index>(g->size() * dof);
    } else {
      auto& v = std::get<Eigen::VectorXd>(out[i]);
      v += delta.segment(off, v.size());
      off += v.size();
    }
  }
  return out;
}

double probe_step(const ParamSet& p, Eigen::Index k) {
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Eigen::Index dim = p.tangent_dim(i);
    if (k < off + dim) {
      if (const auto* v = std::get_if<Eigen::VectorXd>(&p[i])) {
        return kCbrtEps * std::max(1.0, std::abs((*v)[k - off]));
      }
      return kCbrtEps;
    }
    off += dim;
  }
  throw ShapeError("probe_step: coordinate out of range");
}

Eigen::MatrixXd numeric_jacobian(const ResidualFunction& f, const ParamSet& p) {
  const Eigen::Index n = p.tangent_dim();
  const Eigen::VectorXd base = f(p);
  check_finite(base, 0);
  Eigen::MatrixXd J(base.size(), n);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = probe_step(p, k);
    delta[k] = h;
    const Eigen::VectorXd plus = f(retract(p, delta));
    delta[k] = -h;
    const Eigen::VectorXd minus = f(retract(p, delta));
    delta[k] = 0.0;
    check_finite(plus, static_cast<std::size_t>(k));
    check_finite(minus, static_cast<std::size_t>(k));
    if (plus.size() != base.size() || minus.size() != base.size()) {
      throw EvaluationError(static_cast<std::size_t>(k), "residual size changed between probes");
    }
    J.col(k) = (plus - minus) / (2.0 * h);
  }
  return J;
}

double jacobian_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

Eigen::MatrixXd jacobian_dense(const DifferentiableFunction& f, const ParamSet& p,
                               const JacobianOptions& options) {
  if (!f.jacobian) return numeric_jacobian(f.value, p);
  Eigen::MatrixXd J = f.jacobian(p);
  if (options.validate) {
    const Eigen::MatrixXd numeric = numeric_jacobian(f.value, p);
    const double err = jacobian_relative_error(J, numeric);
    if (!(err <= options.tolerance)) {
      throw ContractViolation("analytic Jacobian deviates from central differences by " + std::to_string(err));
    }
  }
  return J;
}

Eigen::MatrixXd BlockDiagonalJacobian::to_dense() const {
  const auto B = static_cast<Eigen::Index>(blocks.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(B * block_rows, B * block_cols);
  for (Eigen::Index b = 0; b < B; ++b) {
    J.block(b * block_rows, b * block_cols, block_rows, block_cols) = blocks[static_cast<std::size_t>(b)];
  }
  return J;
}

std::size_t batch_count(const ParamSet& p, std::size_t items) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (const auto* g = std::get_if<LieBatch>(&p[i])) {
      if (count == 0) count = g->size();
      if (g->size() != count) throw ShapeError("batched parameters disagree on the item count");
    }
  }
  if (count == 0) count = items == 0 ? 1 : items;
  if (items != 0 && count != items) throw ShapeError("batched parameters disagree with the requested item count");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (const auto* v = std::get_if<Eigen::VectorXd>(&p[i])) {
      if (static_cast<std::size_t>(v->size()) % count != 0) {
        throw ShapeError("vector parameter length is not a multiple of the item count");
      }
    }
  }
  return count;
}

namespace {

struct ItemLayout {
  std::size_t items;
  std::vector<Eigen::Index> per_item;  // per-parameter tangent size of one item
  Eigen::Index item_dim = 0;
};

ItemLayout item_layout(const ParamSet& p, std::size_t items) {
  ItemLayout layout{batch_count(p, items), {}, 0};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Eigen::Index d = p.tangent_dim(i) / static_cast<Eigen::Index>(layout.items);
    layout.per_item.push_back(d);
    layout.item_dim += d;
  }
  return layout;
}

/// Applies `step` along local coordinate `local` of every item, with the
/// per-item step supplied by h(item).
template <typename StepFn>
ParamSet probe_all(const ParamSet& p, const ItemLayout& layout, Eigen::Index local, StepFn h) {
  std::size_t param = 0;
  Eigen::Index c = local;
  while (c >= layout.per_item[param]) c -= layout.per_item[param++];

  ParamSet out = p;
  if (auto* g = std::get_if<LieBatch>(&out[param])) {
    double delta[7] = {0, 0, 0, 0, 0, 0, 0};
    for (std::size_t item = 0; item < layout.items; ++item) {
      delta[c] = h(item);
      if (delta[c] != 0.0) perturb_item(*g, item, delta);
    }
  } else {
    auto& v = std::get<Eigen::VectorXd>(out[param]);
    for (std::size_t item = 0; item < layout.items; ++item) {
      v[static_cast<Eigen::Index>(item) * layout.per_item[param] + c] += h(item);
    }
  }
  return out;
}

Eigen::Index column_of(const ParamSet& p, const ItemLayout& layout, std::size_t item, Eigen::Index local) {
  std::size_t param = 0;
  Eigen::Index c = local;
  while (c >= layout.per_item[param]) c -= layout.per_item[param++];
  return p.offset(param) + static_cast<Eigen::Index>(item) * layout.per_item[param] + c;
}

}  // namespace

Eigen::Index batched_column(const ParamSet& p, std::size_t item, Eigen::Index local, std::size_t items) {
  return column_of(p, item_layout(p, items), item, local);
}

BlockDiagonalJacobian jacobian_batched(const ResidualFunction& f, const ParamSet& p,
                                       const BatchedJacobianOptions& options) {
  const ItemLayout layout = item_layout(p, options.items);
  const Eigen::VectorXd base = f(p);
  check_finite(base, 0);
  const auto B = static_cast<Eigen::Index>(layout.items);
  if (base.size() % B != 0) throw ShapeError("jacobian_batched: residual size is not a multiple of the item count");
  const Eigen::Index d = base.size() / B;

  BlockDiagonalJacobian J;
  J.block_rows = d;
  J.block_cols = layout.item_dim;
  J.blocks.assign(layout.items, Eigen::MatrixXd(d, layout.item_dim));

  auto step_for = [&](Eigen::Index local) {
    std::vector<double> h(layout.items);
    for (std::size_t item = 0; item < layout.items; ++item) {
      h[item] = probe_step(p, column_of(p, layout, item, local));
    }
    return h;
  };

  parallel_for(static_cast<std::size_t>(layout.item_dim), [&](std::size_t begin, std::size_t end) {
    for (std::size_t col = begin; col < end; ++col) {
      const auto local = static_cast<Eigen::Index>(col);
      const std::vector<double> h = step_for(local);
      const Eigen::VectorXd plus = f(probe_all(p, layout, local, [&](std::size_t i) { return h[i]; }));
      const Eigen::VectorXd minus = f(probe_all(p, layout, local, [&](std::size_t i) { return -h[i]; }));
      check_finite(plus, col);
      check_finite(minus, col);
      for (Eigen::Index b = 0; b < B; ++b) {
        J.blocks[static_cast<std::size_t>(b)].col(local) =
            (plus.segment(b * d, d) - minus.segment(b * d, d)) / (2.0 * h[static_cast<std::size_t>(b)]);
      }
    }
  }, 1);

  if (options.validate && B > 1) {
    const std::size_t probes[2] = {0, layout.items - 1};
    for (const std::size_t probed : probes) {
      for (Eigen::Index local = 0; local < layout.item_dim; ++local) {
        const double h = probe_step(p, column_of(p, layout, probed, local));
        const Eigen::VectorXd moved = f(probe_all(p, layout, local, [&](std::size_t i) {
          return i == probed ? h : 0.0;
        }));
        for (Eigen::Index b = 0; b < B; ++b) {
          if (static_cast<std::size_t>(b) == probed) continue;
          const auto diff = (moved.segment(b * d, d) - base.segment(b * d, d)).cwiseAbs().maxCoeff();
          if (diff > 1e-12 * (1.0 + base.segment(b * d, d).cwiseAbs().maxCoeff())) {
            throw ContractViolation("item " + std::to_string(b) + " depends on parameters of item " +
                                    std::to_string(probed));
          }
        }
      }
    }
  }
  return J;
}

}  // namespace lieopt
