#pragma once

#include <cmath>
#include <vector>

#include "tethersim/dynamics.hpp"
#include "tethersim/simulation.hpp"

namespace tethersim::testing {

inline constexpr double kPi = 3.14159265358979323846;

/// Paper-geometry parameters: 2.2 m helium sphere, 1 kg payload on a 0.8 m
/// tether, three 3 m rover tethers attached 30 degrees below the equator.
inline SystemParams default_params() {
  SystemParams p;
  p.balloon = spherical_balloon(2.2, 3.6, 0.1786, -30.0 * kPi / 180.0,
                                {0.0, 120.0 * kPi / 180.0, 240.0 * kPi / 180.0});
  p.payload = PayloadParams{};
  p.tether = TetherParams{};
  p.constraint = ConstraintSettings{};
  return p;
}

/// Balloon straight above the origin with the payload hanging at height
/// payload_z; rovers seated on the ground circle that makes every tether
/// exactly taut.
inline SystemState symmetric_taut_state(const SystemParams& params, double payload_z) {
  SystemState s;
  s.balloon_payload.position =
      Vec3{0.0, 0.0, payload_z + params.payload.tether_length} - params.balloon.payload_attach;
  const int n = params.tether.count;
  const double l = params.tether.ugv_tether_length;
  s.ugvs.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vec3 attach = tether_attachment(s.balloon_payload, params.balloon, i);
    const double reach = std::sqrt(l * l - attach.z() * attach.z());
    const double az =
        std::atan2(params.balloon.ugv_attach[i].y(), params.balloon.ugv_attach[i].x());
    s.ugvs[i].x = attach.x() + reach * std::cos(az);
    s.ugvs[i].y = attach.y() + reach * std::sin(az);
  }
  return s;
}

/// Rovers parked directly below their attachment points: every rover tether
/// hangs slack.
inline SystemState slack_tether_state(const SystemParams& params, double balloon_z) {
  SystemState s;
  s.balloon_payload.position = Vec3{0.0, 0.0, balloon_z};
  const int n = params.tether.count;
  s.ugvs.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vec3 attach = tether_attachment(s.balloon_payload, params.balloon, i);
    s.ugvs[i].x = attach.x();
    s.ugvs[i].y = attach.y();
  }
  return s;
}

/// Total mechanical energy: translational (with added mass), rotational and
/// payload kinetic terms plus buoyant and gravitational potentials.
inline double mechanical_energy(const SystemState& s, const SystemParams& params,
                                const Environment& env) {
  const double m_eff = params.balloon.effective_mass(env.air_density);
  const Vec3 omega =
      body_omega_from_euler_rates(s.balloon_payload.attitude, s.balloon_payload.attitude_rate);
  const Vec3 v_p = payload_velocity(s.balloon_payload, params.balloon, params.payload);
  const Vec3 r_p = payload_position(s.balloon_payload, params.balloon, params.payload);
  return 0.5 * m_eff * s.balloon_payload.velocity.squaredNorm() +
         0.5 * omega.dot(params.balloon.inertia_body * omega) +
         0.5 * params.payload.mass * v_p.squaredNorm() -
         buoyancy_force(params.balloon, env) * s.balloon_payload.position.z() +
         params.payload.mass * env.gravity * r_p.z();
}

}  // namespace tethersim::testing
