#include "tethersim/spatial_math.hpp"

#include <cmath>

namespace tethersim {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

RotationMatrix rotation_from_euler(const EulerAngles& angles) {
  const double cr = std::cos(angles.roll), sr = std::sin(angles.roll);
  const double cp = std::cos(angles.pitch), sp = std::sin(angles.pitch);
  const double cy = std::cos(angles.yaw), sy = std::sin(angles.yaw);

  Mat3 rx, ry, rz;
  rx << 1, 0, 0,
        0, cr, -sr,
        0, sr, cr;
  ry << cp, 0, sp,
        0, 1, 0,
        -sp, 0, cp;
  rz << cy, -sy, 0,
        sy, cy, 0,
        0, 0, 1;
  // Body-to-inertial is Rz(yaw)*Ry(pitch)*Rx(roll); R_0b is its transpose.
  return (rz * ry * rx).transpose();
}

Mat3 euler_rate_matrix(const EulerAngles& angles) {
  const double cr = std::cos(angles.roll), sr = std::sin(angles.roll);
  const double cp = std::cos(angles.pitch), sp = std::sin(angles.pitch);
  Mat3 e;
  e << 1, 0, -sp,
       0, cr, sr * cp,
       0, -sr, cr * cp;
  return e;
}

Mat3 euler_rate_matrix_dot(const EulerAngles& angles, const Vec3& rates) {
  const double cr = std::cos(angles.roll), sr = std::sin(angles.roll);
  const double cp = std::cos(angles.pitch), sp = std::sin(angles.pitch);
  const double dr = rates.x(), dp = rates.y();
  Mat3 e_dot;
  e_dot << 0, 0, -cp * dp,
           0, -sr * dr, cr * cp * dr - sr * sp * dp,
           0, -cr * dr, -sr * cp * dr - cr * sp * dp;
  return e_dot;
}

Vec3 euler_rates_from_body_omega(const EulerAngles& angles, const Vec3& omega_body) {
  const double cp = std::cos(angles.pitch);
  if (std::abs(cp) < 1e-6) {
    throw SingularAttitude("euler rate map singular: |cos(pitch)| < 1e-6");
  }
  const double cr = std::cos(angles.roll), sr = std::sin(angles.roll);
  const double tp = std::tan(angles.pitch);
  Mat3 inv;
  inv << 1, sr * tp, cr * tp,
         0, cr, -sr,
         0, sr / cp, cr / cp;
  return inv * omega_body;
}

Vec3 body_omega_from_euler_rates(const EulerAngles& angles, const Vec3& rates) {
  return euler_rate_matrix(angles) * rates;
}

Eigen::VectorXd solve_dense_linear(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw std::invalid_argument("solve_dense_linear: dimension mismatch");
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (min_pivot < 1e-12) {
    throw SingularMatrix("solve_dense_linear: pivot below 1e-12");
  }
  Eigen::VectorXd x = lu.solve(b);
  // A couple of refinement passes keep the residual at the 1e-9*(1+|b|)
  // contract even for conditioning up to ~1e8.
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd r = b - A * x;
    if (r.norm() <= 1e-12 * (1.0 + b.norm())) break;
    x += lu.solve(r);
  }
  return x;
}

}  // namespace tethersim
