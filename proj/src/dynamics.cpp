#include "tethersim/dynamics.hpp"

#include <cmath>

namespace tethersim {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Partials of the payload direction with respect to the swing angles.
Vec3 payload_direction_d_phi(const Vec2& swing) {
  const double cphi = std::cos(swing.x()), sphi = std::sin(swing.x());
  const double cth = std::cos(swing.y());
  return {0.0, -cphi * cth, sphi * cth};
}

Vec3 payload_direction_d_theta(const Vec2& swing) {
  const double cphi = std::cos(swing.x()), sphi = std::sin(swing.x());
  const double cth = std::cos(swing.y()), sth = std::sin(swing.y());
  return {cth, sphi * sth, cphi * sth};
}

// Velocity-quadratic part of the payload direction second derivative.
Vec3 payload_direction_quad(const Vec2& swing, const Vec2& swing_rate) {
  const double cphi = std::cos(swing.x()), sphi = std::sin(swing.x());
  const double cth = std::cos(swing.y()), sth = std::sin(swing.y());
  const Vec3 d_phiphi{0.0, sphi * cth, cphi * cth};
  const Vec3 d_thth{-sth, sphi * cth, cphi * cth};
  const Vec3 d_phith{0.0, cphi * sth, -sphi * sth};
  const double dp = swing_rate.x(), dt = swing_rate.y();
  return d_phiphi * dp * dp + 2.0 * d_phith * dp * dt + d_thth * dt * dt;
}

}  // namespace

Eigen::Matrix<double, 16, 1> BalloonPayloadState::to_vector() const {
  Eigen::Matrix<double, 16, 1> v;
  v << position, attitude.roll, attitude.pitch, attitude.yaw, swing,
      velocity, attitude_rate, swing_rate;
  return v;
}

BalloonPayloadState BalloonPayloadState::from_vector(const Eigen::Matrix<double, 16, 1>& v) {
  BalloonPayloadState s;
  s.position = v.segment<3>(0);
  s.attitude = EulerAngles{v(3), v(4), v(5)};
  s.swing = v.segment<2>(6);
  s.velocity = v.segment<3>(8);
  s.attitude_rate = v.segment<3>(11);
  s.swing_rate = v.segment<2>(14);
  return s;
}

BalloonParams spherical_balloon(double diameter, double structural_mass, double gas_density,
                                double attach_elevation_rad,
                                const std::vector<double>& attach_azimuths_rad) {
  BalloonParams bp;
  const double r = 0.5 * diameter;
  bp.structural_mass = structural_mass;
  bp.gas_density = gas_density;
  bp.volume = 4.0 / 3.0 * kPi * r * r * r;
  bp.reference_area = kPi * r * r;
  // Thin spherical shell plus the enclosed gas as a solid sphere.
  const double gas_mass = gas_density * bp.volume;
  const double inertia = (2.0 / 3.0) * structural_mass * r * r + (2.0 / 5.0) * gas_mass * r * r;
  bp.inertia_body = inertia * Mat3::Identity();
  bp.payload_attach = Vec3{0.0, 0.0, -r};
  bp.ugv_attach.clear();
  const double ce = std::cos(attach_elevation_rad), se = std::sin(attach_elevation_rad);
  for (double az : attach_azimuths_rad) {
    bp.ugv_attach.push_back(r * Vec3{ce * std::cos(az), ce * std::sin(az), se});
  }
  return bp;
}

double buoyancy_force(const BalloonParams& bp, const Environment& env) {
  return (env.air_density - bp.gas_density) * bp.volume * env.gravity -
         bp.structural_mass * env.gravity;
}

Vec3 drag_force(const Vec3& velocity_rel_air, double air_density, double coeff_area) {
  return -0.5 * air_density * coeff_area * velocity_rel_air.norm() * velocity_rel_air;
}

Vec3 payload_direction(const Vec2& swing) {
  const double cphi = std::cos(swing.x()), sphi = std::sin(swing.x());
  const double cth = std::cos(swing.y()), sth = std::sin(swing.y());
  return {sth, -sphi * cth, -cphi * cth};
}

Vec3 payload_position(const BalloonPayloadState& x, const BalloonParams& bp, const PayloadParams& pp) {
  const Mat3 body_to_inertial = rotation_from_euler(x.attitude).transpose();
  return x.position + body_to_inertial * bp.payload_attach + pp.tether_length * payload_direction(x.swing);
}

Vec3 payload_velocity(const BalloonPayloadState& x, const BalloonParams& bp, const PayloadParams& pp) {
  const Mat3 body_to_inertial = rotation_from_euler(x.attitude).transpose();
  const Vec3 omega = body_omega_from_euler_rates(x.attitude, x.attitude_rate);
  const Vec3 e_dot = payload_direction_d_phi(x.swing) * x.swing_rate.x() +
                     payload_direction_d_theta(x.swing) * x.swing_rate.y();
  return x.velocity + body_to_inertial * omega.cross(bp.payload_attach) + pp.tether_length * e_dot;
}

Vec3 tether_attachment(const BalloonPayloadState& x, const BalloonParams& bp, int i) {
  const Mat3 body_to_inertial = rotation_from_euler(x.attitude).transpose();
  return x.position + body_to_inertial * bp.ugv_attach.at(i);
}

Vec3 tether_delta(const BalloonPayloadState& x, const UgvState& rover, const BalloonParams& bp, int i) {
  return rover.position() - tether_attachment(x, bp, i);
}

ConstrainedSystem assemble_constrained_system(const BalloonPayloadState& x,
                                              const std::vector<UgvState>& rovers,
                                              const std::vector<UgvInput>& rover_accels,
                                              const SystemParams& params, const Environment& env) {
  std::vector<bool> engaged(rovers.size(), true);
  return assemble_constrained_system(x, rovers, rover_accels, params, env, engaged);
}

ConstrainedSystem assemble_constrained_system(const BalloonPayloadState& x,
                                              const std::vector<UgvState>& rovers,
                                              const std::vector<UgvInput>& rover_accels,
                                              const SystemParams& params, const Environment& env,
                                              const std::vector<bool>& engaged) {
  const BalloonParams& bp = params.balloon;
  const PayloadParams& pp = params.payload;
  const int n = static_cast<int>(rovers.size());
  const int dim = 9 + n;

  const Mat3 rot_ib = rotation_from_euler(x.attitude);      // inertial -> body
  const Mat3 rot_bi = rot_ib.transpose();                   // body -> inertial
  const Vec3 omega = body_omega_from_euler_rates(x.attitude, x.attitude_rate);
  const Mat3 omega_hat = skew(omega);

  const Vec3 e_p = payload_direction(x.swing);
  const Vec3 e_phi = payload_direction_d_phi(x.swing);
  const Vec3 e_theta = payload_direction_d_theta(x.swing);
  const Vec3 e_quad = payload_direction_quad(x.swing, x.swing_rate);

  const double m_eff = bp.effective_mass(env.air_density);
  const double f_buoy = buoyancy_force(bp, env);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);

  // Balloon translation: m' rBdd - e_P |T_P| - sum e_i |T_i| = F_D,B + W'.
  a.block<3, 3>(0, 0) = m_eff * Mat3::Identity();
  a.block<3, 1>(0, 8) = -e_p;
  const Vec3 drag_balloon = drag_force(x.velocity - env.wind, env.air_density,
                                       bp.drag_coeff * bp.reference_area);
  b.segment<3>(0) = drag_balloon + Vec3{0.0, 0.0, f_buoy};

  // Balloon rotation: I wdot - [r_BP]x R_0b e_P |T_P| - sum [r_Bi]x R_0b e_i |T_i|
  //                   = -w x I w.
  a.block<3, 3>(3, 3) = bp.inertia_body;
  a.block<3, 1>(3, 8) = -skew(bp.payload_attach) * (rot_ib * e_p);
  b.segment<3>(3) = -omega.cross(bp.inertia_body * omega);

  // Payload: m_P rPdd = F_D,P - |T_P| e_P - W_P, with rPdd expanded in the
  // unknowns via the second derivative of the attachment chain.
  const Vec3 payload_vel = payload_velocity(x, bp, pp);
  const Vec3 drag_payload = drag_force(payload_vel - env.wind, env.air_density, pp.drag_area);
  a.block<3, 3>(6, 0) = pp.mass * Mat3::Identity();
  a.block<3, 3>(6, 3) = -pp.mass * rot_bi * skew(bp.payload_attach);
  a.block<3, 1>(6, 6) = pp.mass * pp.tether_length * e_phi;
  a.block<3, 1>(6, 7) = pp.mass * pp.tether_length * e_theta;
  a.block<3, 1>(6, 8) = e_p;
  b.segment<3>(6) = drag_payload - Vec3{0.0, 0.0, pp.mass * env.gravity} -
                    pp.mass * rot_bi * (omega_hat * (omega_hat * bp.payload_attach)) -
                    pp.mass * pp.tether_length * e_quad;

  // Rover tethers: the i-th column/row pair couples tension i with the
  // acceleration-level constraint on |delta r_i|, Baumgarte stabilized.
  const double l_r = params.tether.ugv_tether_length;
  const double alpha = params.constraint.baumgarte_alpha;
  const double beta = params.constraint.baumgarte_beta;
  for (int i = 0; i < n; ++i) {
    const Vec3 delta = tether_delta(x, rovers[i], bp, i);
    const double dist = delta.norm();
    const int row = 9 + i;
    const int col = 9 + i;
    if (!engaged[i]) {
      a(row, col) = 1.0;  // |T_i| = 0
      continue;
    }
    if (dist < 1e-9) {
      throw SingularConfiguration("tether attachment coincides with rover");
    }
    const Vec3 e_i = delta / dist;

    // Tension columns in the balloon equations.
    a.block<3, 1>(0, col) = -e_i;
    a.block<3, 1>(3, col) = -skew(bp.ugv_attach[i]) * (rot_ib * e_i);

    // Constraint row: delta . (rIdd - pIdd) = rhs with
    // pIdd = rBdd + R what^2 r_Bi - R [r_Bi]x wdot.
    const Vec3 attach_vel = x.velocity + rot_bi * omega.cross(bp.ugv_attach[i]);
    const Vec3 delta_dot = rovers[i].velocity() - attach_vel;
    const Vec3 rover_accel{rover_accels[i].ax, rover_accels[i].ay, 0.0};

    a.block<1, 3>(row, 0) = -delta.transpose();
    a.block<1, 3>(row, 3) = delta.transpose() * rot_bi * skew(bp.ugv_attach[i]);
    const double baumgarte = -delta_dot.squaredNorm() - 2.0 * alpha * delta.dot(delta_dot) -
                             0.5 * beta * beta * (delta.squaredNorm() - l_r * l_r);
    b(row) = baumgarte - delta.dot(rover_accel) +
             delta.dot(rot_bi * (omega_hat * (omega_hat * bp.ugv_attach[i])));
  }

  return ConstrainedSystem{std::move(a), std::move(b), engaged};
}

TensionSolution solve_tensions(const ConstrainedSystem& system) {
  const int n = static_cast<int>(system.engaged.size());
  Eigen::MatrixXd a = system.A;
  Eigen::VectorXd b = system.b;
  std::vector<bool> slack(n);
  for (int i = 0; i < n; ++i) slack[i] = !system.engaged[i];

  Eigen::VectorXd u;
  for (int pass = 0; pass <= n; ++pass) {
    try {
      u = solve_dense_linear(a, b);
    } catch (const SingularMatrix&) {
      throw SingularConfiguration("constrained dynamics matrix is singular");
    }
    int worst = -1;
    double worst_tension = -1e-10;
    for (int i = 0; i < n; ++i) {
      if (slack[i]) continue;
      if (u(9 + i) < worst_tension) {
        worst_tension = u(9 + i);
        worst = i;
      }
    }
    if (worst < 0) break;
    if (pass == n) {
      throw NoConvergence("tension clamping did not converge");
    }
    // Pin the most negative tension to zero and drop its constraint row.
    slack[worst] = true;
    a.row(9 + worst).setZero();
    a(9 + worst, 9 + worst) = 1.0;
    b(9 + worst) = 0.0;
  }

  TensionSolution sol;
  sol.linear_accel = u.segment<3>(0);
  sol.body_omega_dot = u.segment<3>(3);
  sol.swing_accel = u.segment<2>(6);
  sol.payload_tension = u(8);
  sol.ugv_tensions = u.segment(9, n);
  for (int i = 0; i < n; ++i) {
    if (slack[i]) sol.ugv_tensions(i) = 0.0;
    // Roundoff-level negatives inside the clamping tolerance carry no force.
    if (sol.ugv_tensions(i) < 0.0) {
      sol.ugv_tensions(i) = 0.0;
      slack[i] = true;
    }
  }
  sol.slack = std::move(slack);
  if (sol.payload_tension < -1e-9) {
    throw SingularConfiguration("payload tether tension is negative (slack payload tether is out of scope)");
  }
  sol.payload_tension = std::max(0.0, sol.payload_tension);
  return sol;
}

TensionSolution solve_constrained_dynamics(const BalloonPayloadState& x,
                                           const std::vector<UgvState>& rovers,
                                           const std::vector<UgvInput>& rover_accels,
                                           const SystemParams& params, const Environment& env) {
  const int n = static_cast<int>(rovers.size());
  const double l_r = params.tether.ugv_tether_length;
  std::vector<bool> engaged(n);
  for (int i = 0; i < n; ++i) {
    const double dist = tether_delta(x, rovers[i], params.balloon, i).norm();
    if (dist > 1.05 * l_r) {
      throw SingularConfiguration("tether overstretched beyond the 5% feasibility band");
    }
    engaged[i] = dist >= l_r * (1.0 - params.constraint.engage_band);
  }
  const ConstrainedSystem sys =
      assemble_constrained_system(x, rovers, rover_accels, params, env, engaged);
  return solve_tensions(sys);
}

TensionSolution solve_given_tensions(const BalloonPayloadState& x,
                                     const std::vector<UgvState>& rovers,
                                     const Eigen::VectorXd& ugv_tensions,
                                     const SystemParams& params, const Environment& env) {
  const int n = static_cast<int>(rovers.size());
  const std::vector<UgvInput> zero_accels(n);
  const std::vector<bool> all_engaged(n, true);
  const ConstrainedSystem sys =
      assemble_constrained_system(x, rovers, zero_accels, params, env, all_engaged);

  // Substitute the commanded tensions and solve the remaining 9x9 block for
  // the accelerations and the payload tension.
  const Eigen::MatrixXd a9 = sys.A.topLeftCorner(9, 9);
  const Eigen::VectorXd b9 = sys.b.head(9) - sys.A.block(0, 9, 9, n) * ugv_tensions;
  Eigen::VectorXd u;
  try {
    u = solve_dense_linear(a9, b9);
  } catch (const SingularMatrix&) {
    throw SingularConfiguration("balloon-payload dynamics matrix is singular");
  }

  TensionSolution sol;
  sol.linear_accel = u.segment<3>(0);
  sol.body_omega_dot = u.segment<3>(3);
  sol.swing_accel = u.segment<2>(6);
  sol.payload_tension = u(8);
  sol.ugv_tensions = ugv_tensions;
  sol.slack.assign(n, false);
  for (int i = 0; i < n; ++i) sol.slack[i] = ugv_tensions(i) == 0.0;
  return sol;
}

Eigen::Matrix<double, 16, 1> derivative_from_solution(const BalloonPayloadState& x,
                                                      const TensionSolution& sol) {
  // omega = E * Theta_dot, so Theta_ddot = E^-1 (omega_dot - Edot * Theta_dot).
  const Mat3 e_dot = euler_rate_matrix_dot(x.attitude, x.attitude_rate);
  const Vec3 attitude_accel =
      euler_rates_from_body_omega(x.attitude, sol.body_omega_dot - e_dot * x.attitude_rate);

  Eigen::Matrix<double, 16, 1> d;
  d.segment<3>(0) = x.velocity;
  d(3) = x.attitude_rate.x();
  d(4) = x.attitude_rate.y();
  d(5) = x.attitude_rate.z();
  d.segment<2>(6) = x.swing_rate;
  d.segment<3>(8) = sol.linear_accel;
  d.segment<3>(11) = attitude_accel;
  d.segment<2>(14) = sol.swing_accel;
  return d;
}

Eigen::Matrix<double, 16, 1> state_derivative(const BalloonPayloadState& x,
                                              const std::vector<UgvState>& rovers,
                                              const std::vector<UgvInput>& rover_accels,
                                              const SystemParams& params, const Environment& env) {
  const TensionSolution sol = solve_constrained_dynamics(x, rovers, rover_accels, params, env);
  return derivative_from_solution(x, sol);
}

}  // namespace tethersim
