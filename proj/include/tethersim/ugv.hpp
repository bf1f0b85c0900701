#pragma once

#include <Eigen/Dense>

#include <vector>

#include "tethersim/spatial_math.hpp"

namespace tethersim {

/// Planar pose and rates of one omnidirectional rover (ground plane, z = 0).
struct UgvState {
  double x{0.0};
  double y{0.0};
  double heading{0.0};
  double vx{0.0};
  double vy{0.0};
  double heading_rate{0.0};

  Eigen::Matrix<double, 6, 1> to_vector() const;
  static UgvState from_vector(const Eigen::Matrix<double, 6, 1>& v);

  Vec3 position() const { return {x, y, 0.0}; }
  Vec3 velocity() const { return {vx, vy, 0.0}; }
};

struct UgvGeometry {
  double wheel_radius{0.05};
  double half_length{0.1};
  double half_width{0.1};
};

/// Commanded inertial-frame accelerations (x, y, heading).
struct UgvInput {
  double ax{0.0};
  double ay{0.0};
  double heading_accel{0.0};
};

/// Configuration kinematic model: rover accelerations are the inputs,
/// wheel/motor dynamics are below this abstraction.
Eigen::Matrix<double, 6, 1> ckm_derivative(const UgvState& state, const UgvInput& input);

/// Forward kinematics map from body twist [vx_b, vy_b, heading_rate] to the
/// four wheel angular velocities (front-left, front-right, rear-left,
/// rear-right) for the standard X-roller mecanum layout.
Eigen::Matrix<double, 4, 3> mecanum_kinematics(const UgvGeometry& geom);

Eigen::Vector4d wheel_speeds(const UgvState& state, const UgvGeometry& geom);

/// Velocity reference ramp over one control interval: v(t) = v_start + a*t,
/// sampled at the wheel-command rate. Consecutive intervals chain without
/// velocity jumps when the next start equals the last sample.
std::vector<Vec2> velocity_reference_update(const Vec2& v_start, const UgvInput& accel_cmd,
                                            double control_dt, double sample_rate_hz = 20.0);

}  // namespace tethersim
