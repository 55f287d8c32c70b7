#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lieopt/lie_core.hpp"
#include "lieopt/optim/kernel.hpp"
#include "lieopt/optim/linear_solver.hpp"
#include "lieopt/optim/lm.hpp"
#include "lieopt/optim/model.hpp"
#include "lieopt/optim/scheduler.hpp"
#include "lieopt/optim/strategy.hpp"
#include "support/oracles.hpp"

using namespace lieopt;
using namespace lieopt::optim;
using doctest::Approx;

namespace {

ParamSet scalar(double v) {
  ParamSet p;
  p.add(Eigen::VectorXd::Constant(1, v));
  return p;
}

/// f(theta) = theta - 2 as a one-item model.
FunctionModel shifted_identity() {
  FunctionModel m;
  m.predict = [](const ParamSet& p) -> Eigen::VectorXd { return p.vector(0); };
  m.target = Eigen::VectorXd::Constant(1, 2.0);
  return m;
}

ResidualBlock block(double J, double W, double R) {
  ResidualBlock b;
  b.residual = Eigen::VectorXd::Constant(1, R);
  b.jacobian = Eigen::MatrixXd::Constant(1, 1, J);
  b.weight = Eigen::MatrixXd::Constant(1, 1, W);
  b.cost = R * W * R;
  return b;
}

LMOptions options_with(Strategy s, Kernel k = Kernel::trivial()) {
  LMOptions o;
  o.strategy = s;
  o.kernel = k;
  return o;
}

Eigen::MatrixXd random_spd(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> N;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = N(rng);
  return M * M.transpose() + n * Eigen::MatrixXd::Identity(n, n);
}

NormalEquations system(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  NormalEquations e;
  e.A = A;
  e.b = b;
  e.damping = A.diagonal();
  return e;
}

/// 9 inliers near 0 (sigma 0.01) and one outlier at 100.
std::vector<double> contaminated_samples() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> N(0.0, 0.01);
  std::vector<double> y;
  for (int i = 0; i < 9; ++i) y.push_back(N(rng));
  y.push_back(100.0);
  return y;
}

FunctionModel location_model(const std::vector<double>& y) {
  FunctionModel m;
  m.predict = [n = y.size()](const ParamSet& p) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), p.vector(0)[0]);
  };
  m.target = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  return m;
}

double robust_loss(const Kernel& k, const std::vector<double>& y, double theta) {
  double s = 0.0;
  for (double v : y) s += apply_kernel(k, (theta - v) * (theta - v)).rho;
  return s;
}

}  // namespace

TEST_CASE("kernels") {
  CHECK(apply_kernel(Kernel::trivial(), 4.0).rho == 4.0);
  CHECK(apply_kernel(Kernel::trivial(), 4.0).derivative == 1.0);
  const auto in = apply_kernel(Kernel::huber(1.0), 0.25);
  CHECK(in.rho == 0.25);
  CHECK(in.derivative == 1.0);
  const auto out = apply_kernel(Kernel::huber(1.0), 4.0);
  CHECK(out.rho == 3.0);
  CHECK(out.derivative == 0.5);
  const auto c0 = apply_kernel(Kernel::cauchy(1.0), 0.0);
  CHECK(c0.rho == 0.0);
  CHECK(c0.derivative == 1.0);
  const auto c = apply_kernel(Kernel::cauchy(2.0), 4.0);
  CHECK(c.rho == Approx(4.0 * std::log(2.0)));
  CHECK(c.derivative == Approx(0.5));
  CHECK_THROWS_AS(apply_kernel(Kernel::huber(1.0), -1e-9), DomainError);
  CHECK_THROWS_AS(Kernel::huber(0.0), DomainError);
  CHECK_THROWS_AS(Kernel::cauchy(-1.0), DomainError);
}

TEST_CASE("robust kernels are concave, non-decreasing, with positive slope") {
  for (const Kernel& k : {Kernel::huber(0.7), Kernel::cauchy(1.3)}) {
    double prev_rho = -1.0, prev_d = 2.0;
    for (double c = 0.0; c < 50.0; c += 0.01) {
      const auto v = apply_kernel(k, c);
      CHECK(v.derivative > 0.0);
      CHECK(v.rho >= prev_rho);
      CHECK(v.derivative <= prev_d + 1e-15);
      // slope matches the derivative
      if (c > 0.02) {
        const double fd = (apply_kernel(k, c + 1e-6).rho - apply_kernel(k, c - 1e-6).rho) / 2e-6;
        CHECK(fd == Approx(v.derivative).epsilon(1e-6));
      }
      prev_rho = v.rho;
      prev_d = v.derivative;
    }
  }
}

TEST_CASE("evaluate examples") {
  const FunctionModel m = [] {
    FunctionModel f;
    f.predict = [](const ParamSet& p) -> Eigen::VectorXd { return p.vector(0); };
    return f;
  }();
  const auto ev = evaluate(m, scalar(2.0), Kernel::trivial());
  REQUIRE(ev.blocks.size() == 1);
  CHECK(ev.blocks[0].residual[0] == 2.0);
  CHECK(ev.blocks[0].cost == 4.0);
  CHECK(ev.loss == 4.0);
  CHECK(evaluate(m, scalar(2.0), Kernel::huber(1.0)).loss == 3.0);
  CHECK(evaluate(m, scalar(0.0), Kernel::huber(1.0)).loss == 0.0);

  FunctionModel bad;
  bad.predict = [](const ParamSet&) -> Eigen::VectorXd { return Eigen::Vector2d(1.0, std::nan("")); };
  try {
    evaluate(bad, scalar(0.0), Kernel::trivial(), false);
    FAIL("expected an evaluation error");
  } catch (const EvaluationError& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("weights shape the cost") {
  FunctionModel m;
  m.predict = [](const ParamSet& p) -> Eigen::VectorXd { return Eigen::Vector4d::Constant(p.vector(0)[0]); };
  m.residual_dim = 2;
  Eigen::Matrix2d W;
  W << 2, 1, 1, 3;
  m.weights = {W};
  const auto ev = evaluate(m, scalar(1.0), Kernel::trivial());
  CHECK(ev.blocks.size() == 2);
  CHECK(ev.loss == Approx(2 * 7.0));
  m.weights = {W, W, W};
  CHECK_THROWS_AS(evaluate(m, scalar(1.0), Kernel::trivial()), ShapeError);
}

TEST_CASE("fast triggs correction") {
  const ResidualBlock b = block(3.0, 1.0, 2.0);
  const auto same = correct_fast_triggs(b, Kernel::trivial());
  CHECK(same.residual == b.residual);
  CHECK(same.jacobian == b.jacobian);

  const auto h = correct_fast_triggs(b, Kernel::huber(1.0));
  CHECK(h.residual[0] == Approx(2.0 * std::sqrt(0.5)).epsilon(1e-15));
  CHECK(h.jacobian(0, 0) == Approx(3.0 * std::sqrt(0.5)).epsilon(1e-15));
  CHECK(h.weight == b.weight);
  CHECK(h.cost == Approx(2.0).epsilon(1e-15));

  const auto z = correct_fast_triggs(block(3.0, 1.0, 0.0), Kernel::cauchy(0.5));
  CHECK(z.residual[0] == 0.0);
}

TEST_CASE("correction then assembly equals assembly of pre-scaled blocks") {
  std::mt19937 rng(5);
  std::normal_distribution<double> N;
  std::vector<ResidualBlock> raw, corrected, prescaled;
  const Kernel k = Kernel::cauchy(0.8);
  for (int i = 0; i < 12; ++i) {
    ResidualBlock b;
    b.residual = Eigen::Vector3d(N(rng), N(rng), N(rng)) * 2.0;
    b.jacobian = Eigen::MatrixXd::NullaryExpr(3, 5, [&] { return N(rng); });
    b.weight = Eigen::Matrix3d::Identity() * (1.0 + i * 0.1);
    b.cost = squared_cost(b.residual, b.weight);
    raw.push_back(b);
    corrected.push_back(correct_fast_triggs(b, k));
    const double s = std::sqrt(apply_kernel(k, b.cost).derivative);
    ResidualBlock p = b;
    p.residual *= s;
    p.jacobian *= s;
    prescaled.push_back(p);
  }
  const auto a = build_normal_equations(corrected, 0.3, 5);
  const auto b = build_normal_equations(prescaled, 0.3, 5);
  CHECK((a.A - b.A).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.b - b.b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normal equation examples") {
  std::vector<ResidualBlock> one{block(1.0, 1.0, 2.0)};
  auto e0 = build_normal_equations(one, 0.0, 1);
  CHECK(e0.A(0, 0) == 1.0);
  CHECK(e0.b[0] == -2.0);
  auto e1 = build_normal_equations(one, 1.0, 1);
  CHECK(e1.A(0, 0) == 2.0);
  CHECK(e1.b[0] == -2.0);
  CHECK(solve_cholesky(e1)[0] == Approx(-1.0));
  std::vector<ResidualBlock> two{block(1.0, 1.0, 2.0), block(1.0, 1.0, 2.0)};
  auto e2 = build_normal_equations(two, 0.5, 1);
  CHECK(e2.A(0, 0) == 2.0 * build_normal_equations(one, 0.5, 1).A(0, 0));
  CHECK(e2.b[0] == -4.0);
}

TEST_CASE("damping is multiplicative on diag(H) with a floor") {
  ResidualBlock b;
  b.residual = Eigen::Vector2d(1.0, -1.0);
  b.jacobian = Eigen::MatrixXd::Zero(2, 3);
  b.jacobian(0, 0) = 2.0;
  b.jacobian(1, 1) = 3.0;
  b.weight = Eigen::Matrix2d::Identity();
  b.cost = 2.0;
  const auto e = build_normal_equations(std::vector{b}, 0.5, 3);
  CHECK(e.A(0, 0) == Approx(4.0 * 1.5));
  CHECK(e.A(1, 1) == Approx(9.0 * 1.5));
  CHECK(e.A(2, 2) == Approx(0.5 * kDampingFloor));
  CHECK(e.A == e.A.transpose());
}

TEST_CASE("sparse and dense assembly agree, columns map into place") {
  ResidualBlock b = block(2.0, 3.0, 1.5);
  b.columns = {4};
  const auto d = build_normal_equations(std::vector{b}, 0.1, 6);
  const auto s = build_sparse_normal_equations(std::vector{b}, 0.1, 6);
  CHECK((Eigen::MatrixXd(s.A) - d.A).cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.A(4, 4) == Approx(12.0 * 1.1));
  CHECK(d.b[4] == -9.0);
  CHECK((s.b - d.b).norm() == 0.0);
}

TEST_CASE("linear solver examples") {
  const Eigen::Vector3d b(1, -2, 3);
  auto eye = system(Eigen::Matrix3d::Identity(), b);
  CHECK(solve_cholesky(eye) == Eigen::VectorXd(b));
  CHECK((solve_pcg(eye, 1e-12, 100) - b).norm() < 1e-14);
  Eigen::Matrix2d D = Eigen::Vector2d(1, 2).asDiagonal();
  auto diag = system(D, Eigen::Vector2d(2, 2));
  CHECK((solve_cholesky(diag) - Eigen::Vector2d(2, 1)).norm() < 1e-15);
  CHECK((solve_pcg(diag, 1e-12, 10) - Eigen::Vector2d(2, 1)).norm() < 1e-14);

  for (int n : {20, 200}) {
    const auto A = random_spd(n, static_cast<unsigned>(n));
    const Eigen::VectorXd rhs = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
    const auto eqs = system(A, rhs);
    const Eigen::VectorXd x1 = solve_cholesky(eqs);
    const Eigen::VectorXd x2 = solve_pcg(eqs, 1e-12, 10 * n);
    CHECK((x1 - x2).norm() <= 1e-8 * x1.norm());
    CHECK((A * x2 - rhs).norm() <= 1e-12 * rhs.norm() * 1.0001);
  }
}

TEST_CASE("cholesky jitter and failures") {
  // Singular PSD matrix: jitter makes it solvable.
  Eigen::Matrix2d singular;
  singular << 1, 1, 1, 1;
  CHECK_NOTHROW(solve_cholesky(system(singular, Eigen::Vector2d(1, 1))));
  Eigen::Matrix2d indefinite;
  indefinite << 1, 0, 0, -1;
  CHECK_THROWS_AS(solve_cholesky(system(indefinite, Eigen::Vector2d(1, 1))), SolverError);
  const auto A = random_spd(30, 3);
  try {
    solve_pcg(system(A, Eigen::VectorXd::Ones(30)), 1e-14, 2);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(e.residual_norm() > 0.0);
  }
}

TEST_CASE("strategy updates") {
  const Strategy tr = Strategy::trust_region(1.0);
  StrategyState s = initial_strategy_state(tr);
  auto d = strategy_update(tr, s, 1.0);
  CHECK(d.accept);
  CHECK(d.lambda == Approx(1.0 / 3.0));
  CHECK(s.nu == 2.0);

  s = {1.0, 2.0};
  d = strategy_update(tr, s, -0.5);
  CHECK_FALSE(d.accept);
  CHECK(d.lambda == 2.0);
  CHECK(s.nu == 4.0);
  d = strategy_update(tr, s, 0.5);
  CHECK(d.accept);
  CHECK(d.lambda == Approx(2.0));
  CHECK(s.nu == 2.0);

  const Strategy c = Strategy::constant(1e-4);
  StrategyState cs = initial_strategy_state(c);
  d = strategy_update(c, cs, 0.3);
  CHECK(d.accept);
  CHECK(d.lambda == 1e-4);
  d = strategy_update(c, cs, -0.3);
  CHECK_FALSE(d.accept);
  CHECK(d.lambda == 1e-4);

  const Strategy a = Strategy::adaptive(1.0);
  StrategyState as = initial_strategy_state(a);
  CHECK(strategy_update(a, as, 0.9).lambda == 0.5);
  CHECK(strategy_update(a, as, 0.5).lambda == 0.5);
  CHECK(strategy_update(a, as, 0.1).lambda == 1.0);
  const auto rej = strategy_update(a, as, -1.0);
  CHECK_FALSE(rej.accept);
  CHECK(rej.lambda == 2.0);

  StrategyState lo{1e-12, 2.0};
  CHECK(strategy_update(tr, lo, 1.0).lambda == 1e-12);
  StrategyState hi{1e12, 2.0};
  CHECK(strategy_update(tr, hi, -1.0).lambda == 1e12);
}

TEST_CASE("lm step examples") {
  const FunctionModel m = shifted_identity();
  {
    auto o = options_with(Strategy::constant(1e-12));
    OptState s = initial_state(m, scalar(0.0), o);
    CHECK(s.loss == 4.0);
    const auto r = lm_step(s, m, o);
    CHECK(r.status == StepStatus::Accepted);
    CHECK(s.params.vector(0)[0] == Approx(2.0).epsilon(1e-10));
  }
  {
    auto o = options_with(Strategy::constant(1.0));
    OptState s = initial_state(m, scalar(0.0), o);
    lm_step(s, m, o);
    CHECK(s.params.vector(0)[0] == Approx(1.0).epsilon(1e-7));
    CHECK(s.loss == Approx(1.0).epsilon(1e-6));
  }
  {
    auto o = options_with(Strategy::trust_region());
    OptState s = initial_state(m, scalar(2.0), o);
    const auto r = lm_step(s, m, o);
    CHECK(r.status == StepStatus::Converged);
    CHECK(s.params.vector(0)[0] == 2.0);
    CHECK(s.loss == 0.0);
  }
}

TEST_CASE("one undamped step solves any weighted linear model") {
  std::mt19937 rng(9);
  std::normal_distribution<double> N;
  const int rows = 30, cols = 6;
  const Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return N(rng); });
  const Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(rows, [&] { return N(rng); });
  std::vector<Eigen::MatrixXd> W;
  Eigen::MatrixXd Wfull = Eigen::MatrixXd::Zero(rows, rows);
  for (int i = 0; i < rows / 2; ++i) {
    Eigen::Matrix2d L;
    L << 1.0 + 0.1 * i, 0.0, 0.3, 0.5;
    W.push_back(L * L.transpose());
    Wfull.block(2 * i, 2 * i, 2, 2) = W.back();
  }
  FunctionModel m;
  m.predict = [&](const ParamSet& p) -> Eigen::VectorXd { return X * p.vector(0); };
  m.jacobian = [&](const ParamSet&) -> Eigen::MatrixXd { return X; };
  m.target = y;
  m.residual_dim = 2;
  m.weights = W;
  ParamSet p;
  p.add(Eigen::VectorXd::Zero(cols));
  auto o = options_with(Strategy::constant(1e-12));
  OptState s = initial_state(m, p, o);
  lm_step(s, m, o);
  const Eigen::VectorXd exact = (X.transpose() * Wfull * X).ldlt().solve(X.transpose() * Wfull * y);
  CHECK((s.params.vector(0) - exact).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rejected steps leave the parameters alone") {
  // A model whose loss rises along every step: f = theta^2 - 1 near a
  // saddle behaves, so use a discontinuous one instead.
  FunctionModel m;
  m.predict = [](const ParamSet& p) -> Eigen::VectorXd {
    const double t = p.vector(0)[0];
    return Eigen::VectorXd::Constant(1, t == 1.0 ? 1.0 : 10.0 + std::abs(t));
  };
  m.jacobian = [](const ParamSet&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Ones(1, 1); };
  auto o = options_with(Strategy::trust_region(1e-3));
  OptState s = initial_state(m, scalar(1.0), o);
  const auto r = lm_step(s, m, o);
  CHECK(r.status == StepStatus::Rejected);
  CHECK(r.rejected == o.max_retries + 1);
  CHECK(s.params.vector(0)[0] == 1.0);
  CHECK(s.loss == 1.0);
  CHECK(s.strategy.lambda > 1e-3);
}

TEST_CASE("accepted losses never increase under adaptive and trust-region") {
  // Rosenbrock-like residuals in two unknowns.
  FunctionModel m;
  m.predict = [](const ParamSet& p) -> Eigen::VectorXd {
    const double x = p.vector(0)[0], y = p.vector(0)[1];
    return Eigen::Vector2d(10.0 * (y - x * x), 1.0 - x);
  };
  m.residual_dim = 2;
  ParamSet p;
  p.add(Eigen::Vector2d(-1.2, 1.0));
  for (const Strategy& st : {Strategy::adaptive(1e-3), Strategy::trust_region(1e-3)}) {
    const auto r = optimize(m, p, options_with(st), StopOnPlateau(100, 5, 1e-14));
    for (std::size_t i = 1; i < r.accepted_losses.size(); ++i) {
      CHECK(r.accepted_losses[i] <= r.accepted_losses[i - 1]);
    }
    CHECK(r.accepted_losses.back() < 1e-10);
    CHECK((r.params.vector(0) - Eigen::Vector2d(1, 1)).norm() < 1e-5);
  }
}

TEST_CASE("pcg and sparse paths reach the same optimum") {
  FunctionModel m;
  m.predict = [](const ParamSet& p) -> Eigen::VectorXd { return p.vector(0).array().sin().matrix(); };
  m.target = Eigen::VectorXd::LinSpaced(40, -0.5, 0.5);
  m.mode = JacobianMode::Batched;
  ParamSet p;
  p.add(Eigen::VectorXd::Zero(40));
  auto o = options_with(Strategy::trust_region());
  const auto a = optimize(m, p, o, StopOnPlateau(20, 3, 1e-16));
  o.solver.kind = SolverKind::PCG;
  o.dense_limit = 10;
  const auto b = optimize(m, p, o, StopOnPlateau(20, 3, 1e-16));
  CHECK((a.params.vector(0) - b.params.vector(0)).norm() < 1e-8);
  CHECK((a.params.vector(0) - m.target.array().asin().matrix()).norm() < 1e-8);
}

TEST_CASE("robust location estimate against a grid oracle") {
  const auto y = contaminated_samples();
  const FunctionModel m = location_model(y);
  const double inlier_mean = std::accumulate(y.begin(), y.end() - 1, 0.0) / 9.0;
  auto solve = [&](const Kernel& k) {
    auto o = options_with(Strategy::trust_region(), k);
    return optimize(m, scalar(0.0), o, StopOnPlateau(100, 5, 1e-15)).params.vector(0)[0];
  };
  const double trivial = solve(Kernel::trivial());
  const double grid_trivial =
      oracle::grid_argmin([&](double t) { return robust_loss(Kernel::trivial(), y, t); }, -5.0, 20.0, 250001);
  CHECK(std::abs(trivial - 10.0) < 0.5);
  CHECK(std::abs(trivial - grid_trivial) < 2e-4);

  // Huber(delta) on squared costs pulls the estimate delta/9 off the inlier
  // mean: the outlier's gradient is capped at 2 delta against 9 inliers.
  for (const double delta : {1.0, 0.5}) {
    const double h = solve(Kernel::huber(delta));
    const double grid =
        oracle::grid_argmin([&](double t) { return robust_loss(Kernel::huber(delta), y, t); }, -5.0, 20.0, 250001);
    CHECK(std::abs(h - grid) < 2e-4);
    CHECK(h == Approx(inlier_mean + delta / 9.0).epsilon(1e-6));
  }
  CHECK(std::abs(solve(Kernel::huber(0.5))) < 0.1);
}

TEST_CASE("scheduler examples") {
  {
    StopOnPlateau s(100, 3, 1e-3);
    CHECK_FALSE(s.step(10));
    CHECK_FALSE(s.step(10));
    CHECK_FALSE(s.step(10));
    const auto r = s.step(10);
    REQUIRE(r);
    CHECK(*r == StopReason::Plateau);
    CHECK_FALSE(s.continual());
  }
  {
    StopOnPlateau s(10, 3, 1e-3);
    double loss = 1.0;
    for (int i = 1; i < 10; ++i) {
      loss /= 2.0;
      CHECK_FALSE(s.step(loss));
    }
    const auto r = s.step(loss / 2.0);
    REQUIRE(r);
    CHECK(*r == StopReason::Budget);
    CHECK(s.count() == 10);
  }
  {
    StopOnPlateau s(100, 3, 1e-3);
    for (double l : {10.0, 9.0, 8.9995, 8.999}) CHECK_FALSE(s.step(l));
    const auto r = s.step(8.9985);
    REQUIRE(r);
    CHECK(*r == StopReason::Plateau);
  }
  {
    StopOnPlateau s(100, 3, 1e-3);
    CHECK_FALSE(s.step(5.0));
    CHECK(s.step(std::nan("")) == StopReason::Diverged);
  }
  {
    std::ostringstream log;
    StopOnPlateau s(1, 3, 1e-3, &log);
    s.step(1.0);
    CHECK(log.str().find("step 1") != std::string::npos);
  }
}
