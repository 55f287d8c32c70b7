#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "lieopt/cli.hpp"
#include "lieopt/pose_graph.hpp"

using namespace lieopt;

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lieopt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("lieopt_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content = {}) const {
    const fs::path p = path / name;
    if (!content.empty()) std::ofstream(p) << content;
    return p.string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

const char* kTwoNodes =
    "VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\n"
    "VERTEX_SE3:QUAT 1 1 0 0 0 0 0 1\n"
    "EDGE_SE3:QUAT 0 1 1 0 0 0 0 0 1 1 0 0 0 0 0 1 0 0 0 0 1 0 0 0 1 0 0 1 0 1\n";

}  // namespace

TEST_CASE("help and bad flags") {
  const auto help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("pgo") != std::string::npos);
  const auto sub = run_cli({"pgo", "--help"});
  CHECK(sub.code == 0);
  CHECK(sub.out.find("trust-region") != std::string::npos);  // defaults are printed
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"nonsense"}).code == 2);
  CHECK(run_cli({"pgo", "x.g2o", "--kernel", "tukey"}).code == 2);
  CHECK(run_cli({"pgo", "x.g2o", "--steps", "0"}).code == 2);
  CHECK(run_cli({"bench", "--precision", "f16"}).code == 2);
  CHECK(run_cli({"--threads", "0", "invdemo"}).code == 2);
}

TEST_CASE("pgo on a consistent file") {
  TempDir dir;
  const auto in = dir.file("two.g2o", kTwoNodes);
  const auto stats = dir.file("stats.json");
  const auto r = run_cli({"pgo", in, "--stats", stats});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(stats));
  CHECK(j["final_chi2"].get<double>() == 0.0);
  CHECK(fs::exists(dir.path / "two_opt.g2o"));
  const auto g = pgo::parse_g2o(slurp((dir.path / "two_opt.g2o").string()));
  CHECK(g.nodes.size() == 2);
}

TEST_CASE("pgo on a generated circle") {
  TempDir dir;
  const auto circle = dir.file("circle.g2o");
  CHECK(run_cli({"gen-circle", "-o", circle, "--seed", "3"}).code == 0);
  const auto out = dir.file("out.g2o");
  const auto r = run_cli({"pgo", circle, "-o", out});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["final_chi2"].get<double>() / j["initial_chi2"].get<double>() < 1e-3);
  CHECK(j["iterations"].get<int>() <= 50);
  const auto optimized = pgo::parse_g2o(slurp(out));
  CHECK(pgo::chi2(optimized) == doctest::Approx(j["final_chi2"].get<double>()).epsilon(1e-9));

  // Reference check passes against its own result and fails against a wrong value.
  const std::string ref = std::to_string(j["final_chi2"].get<double>() + 1.0);
  CHECK(run_cli({"pgo", circle, "-o", out, "--reference-chi2", ref}).code == 3);

  const auto robust = run_cli({"pgo", circle, "-o", out, "--kernel", "huber", "--kernel-delta", "2", "--solver", "pcg"});
  CHECK(robust.code == 0);
}

TEST_CASE("pgo input errors") {
  TempDir dir;
  CHECK(run_cli({"pgo", (dir.path / "missing.g2o").string()}).code == 2);
  const auto bad = dir.file("bad.g2o", "VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\nEDGE_SE3:QUAT 0 1 2\n");
  const auto r = run_cli({"pgo", bad});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("imu trajectories") {
  TempDir dir;
  std::string zero = "t,wx,wy,wz,ax,ay,az\n";
  std::string spin = zero, fall = zero;
  for (int k = 0; k <= 100; ++k) {
    const std::string t = std::to_string(k * 0.01);
    zero += t + ",0,0,0,0,0,0\n";
    spin += t + ",0,0,3.141592653589793,0,0,0\n";
    fall += t + ",0,0,0,0,0,0\n";
  }
  std::string header;
  const auto still = run_cli({"imu", dir.file("zero.csv", zero), "--gravity", "0", "0", "0"});
  CHECK(still.code == 0);
  const auto rows = parse_csv(still.out, &header);
  CHECK(header == "t,px,py,pz,vx,vy,vz,qx,qy,qz,qw,trace_cov");
  CHECK(rows.size() == 101);
  for (const auto& row : rows) {
    for (int c = 1; c <= 9; ++c) CHECK(row[c] == 0.0);
    CHECK(row[10] == 1.0);
  }
  CHECK(rows.back()[11] > rows.front()[11]);

  const auto turned = parse_csv(run_cli({"imu", dir.file("spin.csv", spin)}).out);
  CHECK(std::abs(std::abs(turned.back()[9]) - 1.0) < 1e-6);
  CHECK(std::abs(turned.back()[10]) < 1e-6);

  const auto out = dir.file("fall_out.csv");
  CHECK(run_cli({"imu", dir.file("fall.csv", fall), "-o", out}).code == 0);
  const auto dropped = parse_csv(slurp(out));
  CHECK(dropped.back()[0] == doctest::Approx(1.0));
  CHECK(std::abs(dropped.back()[3] + 4.905) < 1e-9);
}

TEST_CASE("imu input errors") {
  TempDir dir;
  const auto r = run_cli({"imu", dir.file("bad.csv", "t,wx,wy,wz,ax,ay,az\n0,0,0,0,0,0,0\n0.1,0,0,0,0,0,0\n0.05,0,0,0,0,0,0\n")});
  CHECK(r.code == 2);
  CHECK(r.err.find("row 3") != std::string::npos);
  CHECK(run_cli({"imu", dir.file("hdr.csv", "time,wx\n")}).code == 2);
  CHECK(run_cli({"imu", dir.file("short.csv", "t,wx,wy,wz,ax,ay,az\n0,0,0\n")}).code == 2);
  CHECK(run_cli({"imu", (dir.path / "none.csv").string()}).code == 2);
}

TEST_CASE("bench rows") {
  const auto r = run_cli({"bench", "--batch", "1"});
  CHECK(r.code == 0);
  std::string header;
  const auto rows = parse_csv(r.out.substr(0, r.out.find('\n') + 1), &header);
  CHECK(header.rfind("op,mode,batch,precision,ops_per_sec", 0) == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  int count = 0;
  while (std::getline(in, line)) {
    ++count;
    if (line.rfind("f1,forward", 0) == 0) {
      const double check = std::stod(line.substr(line.rfind(',') + 1));
      CHECK(check < 1e-12);
    }
  }
  CHECK(count == 6);
  (void)rows;
  const auto rows32 = cli::run_bench({2}, "f32", 1);
  CHECK(rows32.size() == 6);
  CHECK(rows32[0].precision == "f32");
  CHECK(*rows32[0].self_check < 1e-5);
}

TEST_CASE("invdemo") {
  const auto exact = cli::run_invdemo(1, 0, true);
  CHECK(exact.losses.front() < 1e-28);
  const auto ten = cli::run_invdemo(10, 0);
  CHECK(ten.final_error <= 1e-3);
  CHECK(ten.iterations <= 10);
  const auto r = run_cli({"invdemo", "--batch", "10"});
  CHECK(r.code == 0);
  CHECK(r.out.find("final error") != std::string::npos);
}

TEST_CASE("subcommands are deterministic on one thread") {
  TempDir dir;
  const auto a = run_cli({"gen-circle", "--seed", "9", "--nodes", "20"});
  const auto b = run_cli({"gen-circle", "--seed", "9", "--nodes", "20"});
  CHECK(a.out == b.out);
  const auto in = dir.file("c.g2o", a.out);
  const auto o1 = dir.file("o1.g2o"), o2 = dir.file("o2.g2o");
  run_cli({"--threads", "1", "pgo", in, "-o", o1, "--stats", dir.file("s1.json")});
  run_cli({"--threads", "1", "pgo", in, "-o", o2, "--stats", dir.file("s2.json")});
  CHECK(slurp(o1) == slurp(o2));
  const auto i1 = run_cli({"invdemo", "--batch", "5", "--seed", "4"});
  const auto i2 = run_cli({"invdemo", "--batch", "5", "--seed", "4"});
  CHECK(i1.out.substr(0, i1.out.rfind(',')) == i2.out.substr(0, i2.out.rfind(',')));
}
