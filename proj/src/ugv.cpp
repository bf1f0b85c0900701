#include "tethersim/ugv.hpp"

#include <cmath>
#include <stdexcept>

namespace tethersim {

Eigen::Matrix<double, 6, 1> UgvState::to_vector() const {
  Eigen::Matrix<double, 6, 1> v;
  v << x, y, heading, vx, vy, heading_rate;
  return v;
}

UgvState UgvState::from_vector(const Eigen::Matrix<double, 6, 1>& v) {
  return UgvState{v(0), v(1), v(2), v(3), v(4), v(5)};
}

Eigen::Matrix<double, 6, 1> ckm_derivative(const UgvState& state, const UgvInput& input) {
  Eigen::Matrix<double, 6, 1> d;
  d << state.vx, state.vy, state.heading_rate, input.ax, input.ay, input.heading_accel;
  return d;
}

Eigen::Matrix<double, 4, 3> mecanum_kinematics(const UgvGeometry& geom) {
  if (geom.wheel_radius <= 0.0 || geom.half_length <= 0.0 || geom.half_width <= 0.0) {
    throw std::invalid_argument("mecanum_kinematics: geometry must be positive");
  }
  const double k = geom.half_length + geom.half_width;
  Eigen::Matrix<double, 4, 3> t;
  t << 1.0, -1.0, -k,   // front-left
       1.0, 1.0, k,     // front-right
       1.0, 1.0, -k,    // rear-left
       1.0, -1.0, k;    // rear-right
  return t / geom.wheel_radius;
}

Eigen::Vector4d wheel_speeds(const UgvState& state, const UgvGeometry& geom) {
  const double c = std::cos(state.heading), s = std::sin(state.heading);
  // Planar inertial-to-body rotation R_0i(heading).
  const double vbx = c * state.vx + s * state.vy;
  const double vby = -s * state.vx + c * state.vy;
  Eigen::Vector3d twist(vbx, vby, state.heading_rate);
  return mecanum_kinematics(geom) * twist;
}

std::vector<Vec2> velocity_reference_update(const Vec2& v_start, const UgvInput& accel_cmd,
                                            double control_dt, double sample_rate_hz) {
  if (control_dt <= 0.0 || sample_rate_hz <= 0.0) {
    throw std::invalid_argument("velocity_reference_update: dt and rate must be positive");
  }
  const int n = std::max(1, static_cast<int>(std::round(control_dt * sample_rate_hz)));
  const double dt = control_dt / n;
  std::vector<Vec2> samples;
  samples.reserve(n);
  for (int k = 1; k <= n; ++k) {
    const double t = k * dt;
    samples.emplace_back(v_start.x() + accel_cmd.ax * t, v_start.y() + accel_cmd.ay * t);
  }
  return samples;
}

}  // namespace tethersim
