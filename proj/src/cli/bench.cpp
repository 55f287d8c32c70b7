#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

#include "io.hpp"
#include "lieopt/bench_ops.hpp"
#include "lieopt/cli.hpp"
#include "lieopt/lie_core.hpp"

namespace lieopt::cli {

namespace {

constexpr int kWarmup = 3;
constexpr int kSamples = 7;
constexpr double kMinSampleSeconds = 2e-3;

double seconds_of(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Median seconds per call. Each sample repeats the call enough times to
/// last at least kMinSampleSeconds.
double median_seconds(const std::function<void()>& fn) {
  int reps = 1;
  for (int w = 0; w < kWarmup; ++w) {
    const double t = seconds_of(fn, reps);
    if (t < kMinSampleSeconds) {
      reps = std::max(reps, static_cast<int>(std::ceil(reps * kMinSampleSeconds / std::max(t, 1e-9))));
    }
  }
  std::vector<double> samples(kSamples);
  for (double& s : samples) s = seconds_of(fn, reps) / reps;
  std::nth_element(samples.begin(), samples.begin() + kSamples / 2, samples.end());
  return samples[kSamples / 2];
}

template <typename S>
BasicPointBatch<S> random_points(std::size_t n, std::uint64_t seed) {
  const LieBatch raw = random_tangent<double>(Kind::so3, Shape{n}, 1.0, seed);
  std::vector<S> data(raw.data().begin(), raw.data().end());
  return BasicPointBatch<S>(Shape{n}, std::move(data));
}

template <typename S>
void forward_rows(std::size_t batch, std::uint64_t seed, std::vector<BenchRow>& rows, const char* precision) {
  // Rotation norms well inside the ball so f1 is the identity.
  const auto x = random_tangent<S>(Kind::so3, Shape{batch}, 0.5, seed);
  const auto y = random_tangent<S>(Kind::so3, Shape{batch}, 0.5, seed + 1);
  const auto p = random_points<S>(batch, seed + 2);

  double check = 0.0;
  const auto r1 = bench::f1(x);
  for (std::size_t i = 0; i < x.data().size(); ++i) {
    check = std::max(check, static_cast<double>(std::abs(r1.data()[i] - x.data()[i])));
  }
  const double b = static_cast<double>(batch);
  rows.push_back({"f1", "forward", batch, precision, b / median_seconds([&] { (void)bench::f1(x); }), check});
  rows.push_back({"f2", "forward", batch, precision, b / median_seconds([&] { (void)bench::f2(x, y); }), {}});
  rows.push_back({"f3", "forward", batch, precision, b / median_seconds([&] { (void)bench::f3(x, p); }), {}});
}

double max_block_error(const BlockDiagonalJacobian& J, const std::vector<Eigen::Matrix3d>& analytic) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, jacobian_relative_error(J.blocks[i], analytic[i]));
  }
  return worst;
}

void jacobian_rows(std::size_t batch, std::uint64_t seed, std::vector<BenchRow>& rows) {
  const LieBatch x = random_tangent<double>(Kind::so3, Shape{batch}, 0.5, seed);
  const LieBatch y = random_tangent<double>(Kind::so3, Shape{batch}, 0.5, seed + 1);
  const PointBatch p = random_points<double>(batch, seed + 2);
  ParamSet params;
  params.add(Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(x.data().data(), static_cast<Eigen::Index>(3 * batch))));

  BatchedJacobianOptions opts;
  opts.items = batch;
  const double b = static_cast<double>(batch);
  const std::pair<const char*, ResidualFunction> ops[] = {
      {"f1", bench::f1_function()}, {"f2", bench::f2_function(y)}, {"f3", bench::f3_function(p)}};
  for (const auto& [name, fn] : ops) {
    const BlockDiagonalJacobian J = jacobian_batched(fn, params, opts);
    const std::string op = name;
    const std::vector<Eigen::Matrix3d> analytic =
        op == "f1" ? bench::f1_jacobian(x) : op == "f2" ? bench::f2_jacobian(x, y) : bench::f3_jacobian(x, p);
    const double rate = b / median_seconds([&] { (void)jacobian_batched(fn, params, opts); });
    rows.push_back({op, "jacobian", batch, "f64", rate, max_block_error(J, analytic)});
  }
}

}  // namespace

std::vector<BenchRow> run_bench(const std::vector<std::size_t>& batches, const std::string& precision,
                                std::uint64_t seed) {
  std::vector<BenchRow> rows;
  for (const std::size_t batch : batches) {
    if (precision == "f32") {
      forward_rows<float>(batch, seed, rows, "f32");
    } else {
      forward_rows<double>(batch, seed, rows, "f64");
    }
    jacobian_rows(batch, seed, rows);
  }
  return rows;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::vector<BenchRow> rows = run_bench(cfg.batches, cfg.precision, cfg.seed);
  const bool ok = with_output(cfg.output, out, [&](std::ostream& csv) {
    csv << "op,mode,batch,precision,ops_per_sec,self_check\n";
    char buf[64];
    for (const BenchRow& r : rows) {
      std::snprintf(buf, sizeof buf, "%.6g", r.ops_per_sec);
      csv << r.op << ',' << r.mode << ',' << r.batch << ',' << r.precision << ',' << buf << ',';
      if (r.self_check) {
        std::snprintf(buf, sizeof buf, "%.3e", *r.self_check);
        csv << buf;
      }
      csv << '\n';
    }
  });
  if (!ok) {
    err << "bench: cannot write " << cfg.output << '\n';
    return kInputError;
  }
  return kSuccess;
}

}  // namespace lieopt::cli
