#include "tethersim/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "tethersim/config.hpp"

namespace tethersim {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, const std::string& context) {
  try {
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("invalid number '" + tok + "' in " + context);
  }
}

}  // namespace

void write_telemetry_csv(const std::vector<TelemetryRecord>& records, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");

  const int n = records.empty() ? 0 : static_cast<int>(records.front().ugvs.size());
  f << "t,rP_x,rP_y,rP_z,phiP_dot,thetaP_dot,rB_x,rB_y,rB_z,phiB,thetaB,psiB";
  for (int i = 1; i <= n; ++i) {
    f << ",ugv" << i << "_x,ugv" << i << "_y,ugv" << i << "_theta,ugv" << i << "_vx,ugv" << i
      << "_vy";
  }
  f << ",T_P";
  for (int i = 1; i <= n; ++i) f << ",T_" << i;
  for (int i = 1; i <= n; ++i) f << ",slack_" << i;
  for (int i = 1; i <= n; ++i) f << ",u" << i << "_1,u" << i << "_2,u" << i << "_3";
  f << "\n";

  for (const TelemetryRecord& r : records) {
    f << fmt(r.time) << ',' << fmt(r.payload_position.x()) << ',' << fmt(r.payload_position.y())
      << ',' << fmt(r.payload_position.z()) << ',' << fmt(r.swing_rate.x()) << ','
      << fmt(r.swing_rate.y()) << ',' << fmt(r.balloon_position.x()) << ','
      << fmt(r.balloon_position.y()) << ',' << fmt(r.balloon_position.z()) << ','
      << fmt(r.balloon_attitude.roll) << ',' << fmt(r.balloon_attitude.pitch) << ','
      << fmt(r.balloon_attitude.yaw);
    for (const UgvState& u : r.ugvs) {
      f << ',' << fmt(u.x) << ',' << fmt(u.y) << ',' << fmt(u.heading) << ',' << fmt(u.vx) << ','
        << fmt(u.vy);
    }
    f << ',' << fmt(r.payload_tension);
    for (int i = 0; i < n; ++i) f << ',' << fmt(r.ugv_tensions(i));
    for (int i = 0; i < n; ++i) f << ',' << (r.slack[i] ? 1 : 0);
    for (const UgvInput& u : r.inputs) {
      f << ',' << fmt(u.ax) << ',' << fmt(u.ay) << ',' << fmt(u.heading_accel);
    }
    f << '\n';
  }
}

std::vector<TelemetryRecord> read_telemetry_csv(const std::string& path, int rover_count) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw ParseError("telemetry CSV is empty: " + path);

  const int expected = 12 + 5 * rover_count + 1 + rover_count + rover_count + 3 * rover_count;
  std::vector<TelemetryRecord> records;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto toks = split_csv_line(line);
    if (static_cast<int>(toks.size()) != expected) {
      throw ParseError("telemetry CSV line " + std::to_string(line_no) + ": expected " +
                       std::to_string(expected) + " columns, got " + std::to_string(toks.size()));
    }
    const std::string ctx = path + ":" + std::to_string(line_no);
    int c = 0;
    TelemetryRecord r;
    r.time = parse_double(toks[c++], ctx);
    for (int j = 0; j < 3; ++j) r.payload_position(j) = parse_double(toks[c++], ctx);
    for (int j = 0; j < 2; ++j) r.swing_rate(j) = parse_double(toks[c++], ctx);
    for (int j = 0; j < 3; ++j) r.balloon_position(j) = parse_double(toks[c++], ctx);
    r.balloon_attitude.roll = parse_double(toks[c++], ctx);
    r.balloon_attitude.pitch = parse_double(toks[c++], ctx);
    r.balloon_attitude.yaw = parse_double(toks[c++], ctx);
    r.ugvs.resize(rover_count);
    for (int i = 0; i < rover_count; ++i) {
      r.ugvs[i].x = parse_double(toks[c++], ctx);
      r.ugvs[i].y = parse_double(toks[c++], ctx);
      r.ugvs[i].heading = parse_double(toks[c++], ctx);
      r.ugvs[i].vx = parse_double(toks[c++], ctx);
      r.ugvs[i].vy = parse_double(toks[c++], ctx);
    }
    r.payload_tension = parse_double(toks[c++], ctx);
    r.ugv_tensions.resize(rover_count);
    for (int i = 0; i < rover_count; ++i) r.ugv_tensions(i) = parse_double(toks[c++], ctx);
    r.slack.resize(rover_count);
    for (int i = 0; i < rover_count; ++i) r.slack[i] = parse_double(toks[c++], ctx) != 0.0;
    r.inputs.resize(rover_count);
    for (int i = 0; i < rover_count; ++i) {
      r.inputs[i].ax = parse_double(toks[c++], ctx);
      r.inputs[i].ay = parse_double(toks[c++], ctx);
      r.inputs[i].heading_accel = parse_double(toks[c++], ctx);
    }
    records.push_back(std::move(r));
  }
  return records;
}

AccelProfile load_accel_profile(const std::string& path, int rover_count) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);

  AccelProfile profile;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto toks = split_csv_line(line);
    if (line_no == 1) {
      // Tolerate a header row.
      try {
        (void)std::stod(toks.at(0));
      } catch (const std::exception&) {
        continue;
      }
    }
    if (static_cast<int>(toks.size()) != 1 + 3 * rover_count) {
      throw ParseError("profile line " + std::to_string(line_no) + ": expected " +
                       std::to_string(1 + 3 * rover_count) + " columns");
    }
    const std::string ctx = path + ":" + std::to_string(line_no);
    profile.times.push_back(parse_double(toks[0], ctx));
    std::vector<UgvInput> row(rover_count);
    for (int i = 0; i < rover_count; ++i) {
      row[i].ax = parse_double(toks[1 + 3 * i], ctx);
      row[i].ay = parse_double(toks[2 + 3 * i], ctx);
      row[i].heading_accel = parse_double(toks[3 + 3 * i], ctx);
    }
    profile.samples.push_back(std::move(row));
  }
  return profile;
}

void write_accel_profile_csv(const AccelProfile& profile, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  const int n = profile.samples.empty() ? 0 : static_cast<int>(profile.samples.front().size());
  f << "t";
  for (int i = 1; i <= n; ++i) f << ",u" << i << "_1,u" << i << "_2,u" << i << "_3";
  f << "\n";
  for (size_t k = 0; k < profile.times.size(); ++k) {
    f << fmt(profile.times[k]);
    for (const UgvInput& u : profile.samples[k]) {
      f << ',' << fmt(u.ax) << ',' << fmt(u.ay) << ',' << fmt(u.heading_accel);
    }
    f << '\n';
  }
}

void write_controller_trace_csv(const std::vector<LtvMpcController::TraceRecord>& trace,
                                int rover_count, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "t,status,failsafe,iterations,cost,active_constraints";
  for (int i = 1; i <= rover_count; ++i) f << ",uv_" << i;
  for (int i = 1; i <= rover_count; ++i) f << ",u" << i << "_1,u" << i << "_2,u" << i << "_3";
  f << "\n";
  for (const auto& r : trace) {
    f << fmt(r.time) << ',' << static_cast<int>(r.status) << ',' << (r.failsafe ? 1 : 0) << ','
      << r.iterations << ',' << fmt(r.cost) << ',' << r.active_count;
    for (int i = 0; i < rover_count; ++i) f << ',' << fmt(r.input(i));
    for (int i = 0; i < 3 * rover_count; ++i) f << ',' << fmt(r.input(rover_count + i));
    f << '\n';
  }
}

void write_wheel_reference_csv(const std::vector<TelemetryRecord>& records, double control_dt,
                               const UgvGeometry& geometry, double sample_rate_hz,
                               const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  const int n = records.empty() ? 0 : static_cast<int>(records.front().ugvs.size());
  f << "t";
  for (int i = 1; i <= n; ++i) {
    f << ",w" << i << "_fl,w" << i << "_fr,w" << i << "_rl,w" << i << "_rr";
  }
  f << "\n";

  for (const TelemetryRecord& rec : records) {
    // Only control-interval boundaries seed a reference ramp.
    const double phase = std::fmod(rec.time + 0.5e-9, control_dt);
    if (std::abs(phase) > 1e-6 && std::abs(phase - control_dt) > 1e-6) continue;

    std::vector<std::vector<Vec2>> ramps(n);
    size_t samples = 0;
    for (int i = 0; i < n; ++i) {
      ramps[i] = velocity_reference_update(Vec2{rec.ugvs[i].vx, rec.ugvs[i].vy}, rec.inputs[i],
                                           control_dt, sample_rate_hz);
      samples = ramps[i].size();
    }
    for (size_t s = 0; s < samples; ++s) {
      const double t = rec.time + (s + 1) * control_dt / static_cast<double>(samples);
      f << fmt(t);
      for (int i = 0; i < n; ++i) {
        UgvState ref = rec.ugvs[i];
        ref.vx = ramps[i][s].x();
        ref.vy = ramps[i][s].y();
        const Eigen::Vector4d w = wheel_speeds(ref, geometry);
        f << ',' << fmt(w(0)) << ',' << fmt(w(1)) << ',' << fmt(w(2)) << ',' << fmt(w(3));
      }
      f << '\n';
    }
  }
}

}  // namespace tethersim
