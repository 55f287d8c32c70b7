#include <ostream>

#include "CLI11.hpp"
#include "lieopt/cli.hpp"
#include "lieopt/error.hpp"
#include "lieopt/parallel.hpp"

namespace lieopt::cli {

namespace {

void add_optimizer_flags(CLI::App* app, RunConfig& cfg) {
  app->add_option("--kernel", cfg.kernel, "Robust kernel")
      ->check(CLI::IsMember({"trivial", "huber", "cauchy"}))
      ->capture_default_str();
  app->add_option("--kernel-delta", cfg.kernel_delta, "Kernel width")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--strategy", cfg.strategy, "Damping strategy")
      ->check(CLI::IsMember({"constant", "adaptive", "trust-region"}))
      ->capture_default_str();
  app->add_option("--damping", cfg.damping, "Initial (or constant) damping")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--solver", cfg.solver, "Linear solver")
      ->check(CLI::IsMember({"cholesky", "pcg"}))
      ->capture_default_str();
  app->add_option("--solver-tol", cfg.solver_tol, "PCG relative tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--steps", cfg.steps, "Scheduler iteration budget")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--patience", cfg.patience, "Flat steps tolerated before stopping")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--decreasing", cfg.decreasing, "Minimum loss decrease that counts as progress")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Lie-group least-squares toolkit"};
  app.require_subcommand(1);
  app.add_option("--threads", cfg.threads, "Worker threads for batched sections (1 = reproducible)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* pgo = app.add_subcommand("pgo", "Optimize an SE3 pose graph in g2o format");
  pgo->add_option("input", cfg.input, "Input .g2o file")->required();
  pgo->add_option("-o,--output", cfg.output, "Optimized .g2o (default <input>_opt.g2o)");
  pgo->add_option("--stats", cfg.stats, "Stats JSON path (default stdout)");
  pgo->add_option("--reference-chi2", cfg.reference_chi2, "Fail unless final chi2 is within 1% of this value")
      ->check(CLI::PositiveNumber);
  pgo->add_flag("-v,--verbose", cfg.verbose, "Print scheduler progress");
  add_optimizer_flags(pgo, cfg);

  auto* imu = app.add_subcommand("imu", "Integrate an IMU CSV into a trajectory");
  imu->add_option("input", cfg.input, "IMU CSV with header t,wx,wy,wz,ax,ay,az")->required();
  imu->add_option("-o,--output", cfg.output, "Trajectory CSV (default stdout)");
  imu->add_option("--gravity", cfg.gravity, "Gravity vector in m/s^2")->expected(3)->capture_default_str();
  imu->add_option("--gyro-noise", cfg.gyro_noise, "Gyro noise density, rad/s/sqrt(Hz)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  imu->add_option("--accel-noise", cfg.accel_noise, "Accelerometer noise density, m/s^2/sqrt(Hz)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Throughput of f1/f2/f3 and their batched Jacobians");
  bench->add_option("--batch", cfg.batches, "Batch sizes")->delimiter(',')->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--precision", cfg.precision, "Forward-pass precision")
      ->check(CLI::IsMember({"f32", "f64"}))
      ->capture_default_str();
  bench->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  bench->add_option("-o,--output", cfg.output, "CSV path (default stdout)");

  auto* inv = app.add_subcommand("invdemo", "Estimate batched SE3 inverses with LM");
  inv->add_option("--batch", cfg.batch, "Number of transforms")->check(CLI::PositiveNumber)->capture_default_str();
  inv->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  inv->add_flag("--init-inverse", cfg.init_inverse, "Start from the exact inverse");

  auto* gen = app.add_subcommand("gen-circle", "Write a synthetic noisy circle pose graph");
  gen->add_option("-o,--output", cfg.output, "Output .g2o (default stdout)");
  gen->add_option("--nodes", cfg.nodes, "Number of poses")->check(CLI::Range(2, 1000000))->capture_default_str();
  gen->add_option("--radius", cfg.radius, "Circle radius in m")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--translation-noise", cfg.translation_noise, "Odometry translation noise of the initial estimate, m")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  gen->add_option("--rotation-noise", cfg.rotation_noise, "Odometry rotation noise of the initial estimate, rad")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  gen->add_option("--measurement-translation-noise", cfg.measurement_translation_noise,
                  "Noise added to stored measurements, m")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  gen->add_option("--measurement-rotation-noise", cfg.measurement_rotation_noise,
                  "Noise added to stored measurements, rad")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  gen->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }
  set_num_threads(cfg.threads);

  try {
    if (pgo->parsed()) return cmd_pgo(cfg, out, err);
    if (imu->parsed()) return cmd_imu(cfg, out, err);
    if (bench->parsed()) return cmd_bench(cfg, out, err);
    if (inv->parsed()) return cmd_invdemo(cfg, out, err);
    if (gen->parsed()) return cmd_gen_circle(cfg, out, err);
  } catch (const SolverError& e) {
    err << e.what() << '\n';
    return kNumericalFailure;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace lieopt::cli
