#pragma once

#include <string>
#include <vector>

#include "tethersim/mpc.hpp"
#include "tethersim/simulation.hpp"
#include "tethersim/ugv.hpp"

namespace tethersim {

/// Telemetry columns: t, rP_x..z, phiP_dot, thetaP_dot, rB_x..z,
/// phiB, thetaB, psiB, per-rover x,y,theta,vx,vy, T_P, T_1..n, slack_1..n,
/// then u_{i,1..3} per rover. Nine significant digits, comma separated, LF.
void write_telemetry_csv(const std::vector<TelemetryRecord>& records, const std::string& path);

std::vector<TelemetryRecord> read_telemetry_csv(const std::string& path, int rover_count);

/// Replay profile CSV: header row, then t plus three acceleration columns
/// per rover. Throws ParseError on malformed rows.
AccelProfile load_accel_profile(const std::string& path, int rover_count);

void write_accel_profile_csv(const AccelProfile& profile, const std::string& path);

void write_controller_trace_csv(const std::vector<LtvMpcController::TraceRecord>& trace,
                                int rover_count, const std::string& path);

/// Wheel angular-velocity references: velocity ramps rebuilt per control
/// interval from telemetry at the interval boundaries, mapped through the
/// mecanum forward kinematics and sampled at the wheel-command rate.
void write_wheel_reference_csv(const std::vector<TelemetryRecord>& records, double control_dt,
                               const UgvGeometry& geometry, double sample_rate_hz,
                               const std::string& path);

}  // namespace tethersim
