#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lieopt::cli {

enum ExitCode : int { kSuccess = 0, kInputError = 2, kNumericalFailure = 3 };

/// Every flag of every subcommand. Defaults here are the ones shown by
/// --help.
struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string output;
  std::string stats;
  std::string precision = "f64";
  std::string kernel = "trivial";
  double kernel_delta = 1.0;
  std::string strategy = "trust-region";
  double damping = 1e-4;
  std::string solver = "cholesky";
  double solver_tol = 1e-10;
  int steps = 50;
  int patience = 3;
  double decreasing = 1e-3;
  std::uint64_t seed = 0;
  std::vector<std::size_t> batches{100, 10000};
  std::size_t batch = 10;
  std::size_t threads = 1;
  std::optional<double> reference_chi2;
  std::vector<double> gravity{0.0, 0.0, -9.81};
  double gyro_noise = 1.7e-3;
  double accel_noise = 2.0e-2;
  bool init_inverse = false;
  bool verbose = false;
  // gen-circle
  int nodes = 100;
  double radius = 10.0;
  double translation_noise = 0.05;
  double rotation_noise = 0.02;
  double measurement_translation_noise = 0.0;
  double measurement_rotation_noise = 0.0;
};

/// Parses argv and dispatches. Bad flags map to kInputError.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int cmd_pgo(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_imu(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_invdemo(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_gen_circle(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct InvDemoResult {
  std::vector<double> losses;  // initial loss then one entry per iteration
  int iterations = 0;
  double final_error = 0.0;
  double wall_time_s = 0.0;
  std::string stop_reason;
};

/// Batched SE3 inverse estimation: theta * input -> identity, residual
/// Log(theta * input), LM with Constant(1e-4) under
/// StopOnPlateau(10, 3, 1e-3).
InvDemoResult run_invdemo(std::size_t batch, std::uint64_t seed, bool init_inverse = false,
                          std::ostream* table = nullptr);

struct BenchRow {
  std::string op;
  std::string mode;
  std::size_t batch = 0;
  std::string precision;
  double ops_per_sec = 0.0;
  std::optional<double> self_check;
};

/// Times f1/f2/f3 forward and their batched Jacobians: 3 warmup runs, then
/// the median of 7 timed samples.
std::vector<BenchRow> run_bench(const std::vector<std::size_t>& batches, const std::string& precision,
                                std::uint64_t seed);

}  // namespace lieopt::cli
