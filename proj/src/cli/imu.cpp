#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "io.hpp"
#include "lieopt/cli.hpp"
#include "lieopt/error.hpp"
#include "lieopt/imu_preint.hpp"

namespace lieopt::cli {

namespace {

struct ImuRow {
  double t;
  Eigen::Vector3d gyro;
  Eigen::Vector3d accel;
};

std::string strip(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\r') out += c;
  }
  return out;
}

/// Reads `t,wx,wy,wz,ax,ay,az`. Row numbers count data rows from 1.
std::vector<ImuRow> read_imu_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip(line) != "t,wx,wy,wz,ax,ay,az") {
    throw ParseError(1, "expected header t,wx,wy,wz,ax,ay,az");
  }
  std::vector<ImuRow> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const std::string s = strip(line);
    if (s.empty()) continue;
    ++row;
    double v[7];
    std::size_t pos = 0;
    for (int k = 0; k < 7; ++k) {
      const std::size_t end = s.find(',', pos);
      const std::size_t stop = end == std::string::npos ? s.size() : end;
      const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + stop, v[k]);
      if (ec != std::errc() || ptr != s.data() + stop || (k < 6 && end == std::string::npos)) {
        throw ParseError(row, "row " + std::to_string(row) + " must hold 7 numbers");
      }
      pos = stop + 1;
      if (k == 6 && end != std::string::npos) throw ParseError(row, "row " + std::to_string(row) + " has extra fields");
    }
    if (!rows.empty() && !(v[0] > rows.back().t)) {
      throw ParseError(row, "row " + std::to_string(row) + ": timestamp is not increasing");
    }
    rows.push_back({v[0], {v[1], v[2], v[3]}, {v[4], v[5], v[6]}});
  }
  return rows;
}

void write_row(std::ostream& out, double t, const imu::NavState& x, double trace) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t,
                x.p.x(), x.p.y(), x.p.z(), x.v.x(), x.v.y(), x.v.z(), x.R.x(), x.R.y(), x.R.z(), x.R.w(), trace);
  out << buf;
}

}  // namespace

int cmd_imu(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::ifstream in(cfg.input);
  if (!in) {
    err << "imu: cannot open " << cfg.input << '\n';
    return kInputError;
  }
  std::vector<ImuRow> rows;
  try {
    rows = read_imu_csv(in);
  } catch (const ParseError& e) {
    err << "imu: " << cfg.input << ": " << e.what() << '\n';
    return kInputError;
  }
  if (cfg.gravity.size() != 3) {
    err << "imu: gravity needs three components\n";
    return kInputError;
  }
  const Eigen::Vector3d gravity(cfg.gravity[0], cfg.gravity[1], cfg.gravity[2]);
  const imu::ImuNoise noise{cfg.gyro_noise, cfg.accel_noise};

  const bool ok = with_output(cfg.output, out, [&](std::ostream& csv) {
    csv << "t,px,py,pz,vx,vy,vz,qx,qy,qz,qw,trace_cov\n";
    const imu::NavState start;
    imu::PreintState state;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (k > 0) {
        state = imu::integrate_step(state, rows[k - 1].gyro, rows[k - 1].accel, rows[k].t - rows[k - 1].t, noise);
      }
      write_row(csv, rows[k].t, imu::predict(start, state, gravity), state.cov.trace());
    }
  });
  if (!ok) {
    err << "imu: cannot write " << cfg.output << '\n';
    return kInputError;
  }
  return kSuccess;
}

}  // namespace lieopt::cli
