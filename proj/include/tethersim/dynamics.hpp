#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "tethersim/spatial_math.hpp"
#include "tethersim/ugv.hpp"

namespace tethersim {

struct SingularConfiguration : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BalloonParams {
  double structural_mass{3.6};      // kg
  double volume{5.575279763};      // m^3
  double gas_density{0.1786};      // kg/m^3 (helium)
  Mat3 inertia_body{Mat3::Identity()};
  double drag_coeff{0.47};
  double reference_area{3.801327111};  // m^2, frontal disc of a 2.2 m sphere
  double added_mass_coeff{0.5};        // potential-flow sphere value
  Vec3 payload_attach{0.0, 0.0, -1.1};  // r_BP in body frame
  std::vector<Vec3> ugv_attach;         // r_Bi in body frame, one per rover

  /// Effective translational mass: structure + enclosed gas + added air mass.
  double effective_mass(double air_density) const {
    return structural_mass + gas_density * volume + added_mass_coeff * air_density * volume;
  }
};

/// Builds balloon parameters for a spherical envelope of the given diameter:
/// volume/area from the sphere, inertia as thin shell plus enclosed gas,
/// payload tether at the bottom pole, rover tethers on the surface at the
/// given elevation (negative = below the equator) and azimuths.
BalloonParams spherical_balloon(double diameter, double structural_mass, double gas_density,
                                double attach_elevation_rad, const std::vector<double>& attach_azimuths_rad);

struct Environment {
  double air_density{1.225};  // kg/m^3
  double gravity{9.81};       // m/s^2
  Vec3 wind{0.0, 0.0, 0.0};   // m/s, uniform
};

struct PayloadParams {
  double mass{1.0};           // kg
  double tether_length{0.8};  // m
  double drag_area{0.01};     // C_D * A, m^2
};

struct TetherParams {
  double ugv_tether_length{3.0};  // m
  int count{3};
};

/// Baumgarte gains for the acceleration-level tether constraints and the
/// geometric band inside which a tether is treated as taut.
struct ConstraintSettings {
  double baumgarte_alpha{5.0};  // 1/s
  double baumgarte_beta{5.0};   // 1/s
  double engage_band{5e-4};     // relative to tether length
};

struct SystemParams {
  BalloonParams balloon;
  PayloadParams payload;
  TetherParams tether;
  ConstraintSettings constraint;
};

/// 16-component combined balloon-payload state: pose, swing angles, rates.
struct BalloonPayloadState {
  Vec3 position{0.0, 0.0, 0.0};       // r_B, inertial
  EulerAngles attitude;                // Theta_B
  Vec2 swing{0.0, 0.0};                // (phi_P, theta_P)
  Vec3 velocity{0.0, 0.0, 0.0};        // r_B dot
  Vec3 attitude_rate{0.0, 0.0, 0.0};   // Theta_B dot
  Vec2 swing_rate{0.0, 0.0};

  static constexpr int kDim = 16;
  Eigen::Matrix<double, 16, 1> to_vector() const;
  static BalloonPayloadState from_vector(const Eigen::Matrix<double, 16, 1>& v);
};

/// Result of one constrained-dynamics solve: tension magnitudes, slack flags
/// and the accelerations consistent with them.
struct TensionSolution {
  double payload_tension{0.0};    // N
  Eigen::VectorXd ugv_tensions;   // N, one per rover
  std::vector<bool> slack;        // true iff the rover tether carries no force
  Vec3 linear_accel{0.0, 0.0, 0.0};      // r_B ddot
  Vec3 body_omega_dot{0.0, 0.0, 0.0};    // omega_B^b dot
  Vec2 swing_accel{0.0, 0.0};            // Theta_P ddot
};

/// Assembled linear system A*u = b over the unknowns
/// [r_B ddot (3), omega_B^b dot (3), Theta_P ddot (2), |T_P| (1), |T_i| (n)].
/// Rows: balloon translation (3), balloon rotation (3), payload (3), then one
/// tether acceleration constraint per rover. Disengaged tethers get a pinned
/// |T_i| = 0 row instead of a constraint row.
struct ConstrainedSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<bool> engaged;
};

double buoyancy_force(const BalloonParams& bp, const Environment& env);

/// Quadratic drag, opposing the velocity relative to the surrounding air.
Vec3 drag_force(const Vec3& velocity_rel_air, double air_density, double coeff_area);

/// Unit vector from the payload attachment point toward the payload,
/// parameterized so that (0, 0) is straight down.
Vec3 payload_direction(const Vec2& swing);

Vec3 payload_position(const BalloonPayloadState& x, const BalloonParams& bp, const PayloadParams& pp);
Vec3 payload_velocity(const BalloonPayloadState& x, const BalloonParams& bp, const PayloadParams& pp);

/// Inertial position of rover tether attachment point i on the balloon.
Vec3 tether_attachment(const BalloonPayloadState& x, const BalloonParams& bp, int i);

/// Delta r_i = r_i - attachment_i, the rover-tether span vector.
Vec3 tether_delta(const BalloonPayloadState& x, const UgvState& rover, const BalloonParams& bp, int i);

ConstrainedSystem assemble_constrained_system(const BalloonPayloadState& x,
                                              const std::vector<UgvState>& rovers,
                                              const std::vector<UgvInput>& rover_accels,
                                              const SystemParams& params, const Environment& env);

ConstrainedSystem assemble_constrained_system(const BalloonPayloadState& x,
                                              const std::vector<UgvState>& rovers,
                                              const std::vector<UgvInput>& rover_accels,
                                              const SystemParams& params, const Environment& env,
                                              const std::vector<bool>& engaged);

/// Complementarity solve by iterative clamping: re-solve with the most
/// negative rover tension pinned to zero until all tensions are nonnegative.
TensionSolution solve_tensions(const ConstrainedSystem& system);

/// Geometric engagement (taut band) plus assembly plus clamping in one call.
TensionSolution solve_constrained_dynamics(const BalloonPayloadState& x,
                                           const std::vector<UgvState>& rovers,
                                           const std::vector<UgvInput>& rover_accels,
                                           const SystemParams& params, const Environment& env);

/// Balloon-payload accelerations for commanded rover tether tensions, i.e.
/// the tension-steered form x_BP_dot = f(x_BP, |T_i|) used by the prediction
/// model. The payload tension remains an internal unknown.
TensionSolution solve_given_tensions(const BalloonPayloadState& x,
                                     const std::vector<UgvState>& rovers,
                                     const Eigen::VectorXd& ugv_tensions,
                                     const SystemParams& params, const Environment& env);

/// Maps solved accelerations into the 16-component state derivative,
/// converting body angular acceleration to Euler-angle second derivatives.
Eigen::Matrix<double, 16, 1> derivative_from_solution(const BalloonPayloadState& x,
                                                      const TensionSolution& sol);

Eigen::Matrix<double, 16, 1> state_derivative(const BalloonPayloadState& x,
                                              const std::vector<UgvState>& rovers,
                                              const std::vector<UgvInput>& rover_accels,
                                              const SystemParams& params, const Environment& env);

}  // namespace tethersim
