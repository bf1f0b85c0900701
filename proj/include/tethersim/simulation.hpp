#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "tethersim/dynamics.hpp"
#include "tethersim/ugv.hpp"

namespace tethersim {

struct ScenarioConfig;

struct NumericalBlowup : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleInitialState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProfileGap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SystemState {
  double time{0.0};
  BalloonPayloadState balloon_payload;
  std::vector<UgvState> ugvs;

  int dim() const { return BalloonPayloadState::kDim + 6 * static_cast<int>(ugvs.size()); }
  Eigen::VectorXd to_vector() const;
  static SystemState from_vector(double time, const Eigen::VectorXd& v, int ugv_count);
};

struct TelemetryRecord {
  double time{0.0};
  Vec3 payload_position{0.0, 0.0, 0.0};
  Vec2 swing_rate{0.0, 0.0};
  Vec2 swing{0.0, 0.0};  // not serialized; kept for consistency checks
  Vec3 balloon_position{0.0, 0.0, 0.0};
  EulerAngles balloon_attitude;
  std::vector<UgvState> ugvs;
  double payload_tension{0.0};
  Eigen::VectorXd ugv_tensions;
  std::vector<bool> slack;
  std::vector<UgvInput> inputs;
};

/// Box gust with half-cosine ramps at both edges.
struct GustSpec {
  double start{0.0};
  double duration{0.0};
  Vec3 velocity{0.0, 0.0, 0.0};
};

/// Superimposes all gusts active at time t onto the base wind.
Environment apply_wind(const Environment& base, double t, const std::vector<GustSpec>& gusts);

/// Classical RK4 over the concatenated balloon-payload + rover states with
/// zero-order-hold inputs. Throws NumericalBlowup when any state exceeds 1e6.
SystemState rk4_step(const SystemState& state, const std::vector<UgvInput>& inputs, double dt,
                     const SystemParams& params, const Environment& env,
                     const std::vector<GustSpec>& gusts = {});

/// Receding-horizon controller interface; implemented by the MPC module.
struct Controller {
  virtual ~Controller() = default;
  virtual double sample_time() const = 0;
  virtual std::vector<UgvInput> update(const SystemState& state) = 0;
};

/// Piecewise-constant per-rover acceleration profiles for open-loop replay.
struct AccelProfile {
  std::vector<double> times;
  std::vector<std::vector<UgvInput>> samples;  // [sample][rover]

  std::vector<UgvInput> at(double t) const;
  /// Throws ProfileGap when sampling leaves holes > 2x the profile step or
  /// the profile ends before the requested duration.
  void validate(double duration, int rover_count) const;
};

/// Symmetric taut initial state for the configured payload position, refined
/// by a Newton pre-solve on the static equilibrium equations (tol 1e-10).
/// Throws InfeasibleInitialState when the tether geometry is inconsistent.
SystemState make_initial_state(const ScenarioConfig& config);

/// Newton iteration on the equilibrium equations: adjusts balloon pose, swing
/// angles and tensions until all accelerations and constraint residuals
/// vanish. Rover positions are held fixed.
BalloonPayloadState refine_equilibrium(const BalloonPayloadState& guess,
                                       const std::vector<UgvState>& rovers,
                                       const SystemParams& params, const Environment& env,
                                       double tol = 1e-10, int max_iterations = 50);

std::vector<TelemetryRecord> run_scenario(const ScenarioConfig& config, Controller* controller);

std::vector<TelemetryRecord> replay_inputs(const ScenarioConfig& config, const AccelProfile& profile);

}  // namespace tethersim
