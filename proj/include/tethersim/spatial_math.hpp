#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace tethersim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using RotationMatrix = Eigen::Matrix3d;

// Intrinsic ZYX (yaw-pitch-roll) attitude. Pitch must stay inside
// (-pi/2, pi/2) so the Euler-rate map remains invertible.
struct EulerAngles {
  double roll{0.0};
  double pitch{0.0};
  double yaw{0.0};
};

struct SingularAttitude : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Mat3 skew(const Vec3& v);

/// Inertial-to-body rotation R_0b for the ZYX convention.
/// Body-to-inertial is the transpose.
RotationMatrix rotation_from_euler(const EulerAngles& angles);

/// E such that omega_body = E * [roll_rate, pitch_rate, yaw_rate].
Mat3 euler_rate_matrix(const EulerAngles& angles);

/// Time derivative of euler_rate_matrix along the given angle rates.
Mat3 euler_rate_matrix_dot(const EulerAngles& angles, const Vec3& rates);

/// Throws SingularAttitude when |cos(pitch)| < 1e-6.
Vec3 euler_rates_from_body_omega(const EulerAngles& angles, const Vec3& omega_body);

Vec3 body_omega_from_euler_rates(const EulerAngles& angles, const Vec3& rates);

/// LU solve with partial pivoting plus iterative refinement. Intended for the
/// small square systems used throughout (tension solves, KKT steps).
/// Throws SingularMatrix when a pivot magnitude drops below 1e-12.
Eigen::VectorXd solve_dense_linear(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

}  // namespace tethersim
