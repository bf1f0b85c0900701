#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

#include "tethersim/qp.hpp"
#include "tethersim/simulation.hpp"

namespace tethersim {

struct InfeasibleBounds : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Controller settings. Output order is [payload position (3), swing rates
/// (2)]; input order is [tether tensions (n), rover accelerations (3n)].
struct MpcConfig {
  double sample_time{1.0};
  int horizon{15};
  Eigen::Matrix<double, 5, 1> output_weights{Eigen::Matrix<double, 5, 1>{1.0, 1.0, 1.0, 10.0, 10.0}};
  Eigen::VectorXd input_variation_weights;  // n + 3n entries
  Eigen::Matrix<double, 5, 1> output_scales{Eigen::Matrix<double, 5, 1>{0.5, 0.5, 0.5, 1.0, 1.0}};
  Eigen::VectorXd input_scales;  // n + 3n entries
  double accel_bound{0.1};       // m/s^2
  double rover_position_bound{5.0};
  double rover_speed_bound{0.5};
  Eigen::Matrix<double, 5, 1> output_bounds{Eigen::Matrix<double, 5, 1>{3.0, 3.0, 3.0, 5.0, 5.0}};
  bool relinearize_along_horizon{false};
  int qp_max_iterations{200};
  double qp_tolerance{1e-6};
  double hessian_regularization{1e-8};

  /// Fills the per-input vectors for the given rover count: tension-variation
  /// weights 10x the acceleration ones, scales normalizing tensions by 20 N
  /// and accelerations by 0.1 m/s^2.
  static MpcConfig defaults_for(int rover_count);
};

struct ReferenceWaypoint {
  double time{0.0};
  Vec3 payload_position{0.0, 0.0, 0.0};
  Vec2 swing_rate{0.0, 0.0};
};
using ReferenceSchedule = std::vector<ReferenceWaypoint>;

/// Active waypoint at time t: last activation <= t, held beyond the ends.
Eigen::Matrix<double, 5, 1> reference_at(const ReferenceSchedule& schedule, double t);

/// Previewed references stacked over the horizon: entry block k-1 holds the
/// waypoint active at t0 + k*T_s, so future reference changes inside the
/// horizon are targeted from their activation step onward.
Eigen::VectorXd build_reference_stack(const ReferenceSchedule& schedule, double t0,
                                      const MpcConfig& config);

/// Continuous-time LTV model around one nominal point.
struct LinearizedModel {
  Eigen::MatrixXd A;                    // d f / d x
  Eigen::MatrixXd B;                    // d f / d u
  Eigen::VectorXd residual;             // f(x0,u0) - A x0 - B u0
  Eigen::MatrixXd C;                    // d y / d x
  Eigen::VectorXd output_residual;      // y(x0) - C x0
  Eigen::MatrixXd constraint_jacobian;  // d K_i / d x, one row per tether
  Eigen::VectorXd constraint_value;     // K_i(x0)
  Eigen::VectorXd x0;
  Eigen::VectorXd u0;
};

struct DiscreteModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd affine;
};

/// Condensed horizon QP over the stacked input sequence.
struct MpcProblem {
  QpProblem qp;
  int horizon{0};
  int input_dim{0};
  Eigen::VectorXd reference_stack;  // 5 * horizon previewed references
  Eigen::VectorXd previous_input;
  double cost_offset{0.0};  // constant completing the quadratic tracking cost
};

struct FdJacobians {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd residual;
};

/// Central-difference Jacobians with per-variable step max(1e-6, 1e-6*|x|).
FdJacobians linearize(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& u0);

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0);

/// Zero-order-hold discretization via the augmented matrix exponential,
/// evaluated with 4th-order Taylor and scaling-and-squaring.
DiscreteModel discretize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::VectorXd& residual, double sample_time);

/// Prediction-model derivative: tether tensions act as inputs on the
/// balloon-payload block, rovers are double integrators.
/// State = [x_BP (16), x_R1..x_Rn (6 each)], input = [u_v (n), u_R (3n)].
Eigen::VectorXd mpc_model_derivative(const Eigen::VectorXd& state, const Eigen::VectorXd& input,
                                     const SystemParams& params, const Environment& env);

/// Outputs y = [payload position, swing rates].
Eigen::VectorXd mpc_model_output(const Eigen::VectorXd& state, const SystemParams& params);

/// Tether-length constraint K_i = |delta r_i|^2 - l_R^2 on the stacked state.
double tether_constraint_value(const Eigen::VectorXd& state, int i, const SystemParams& params);

LinearizedModel linearize_plant(const SystemState& state, const Eigen::VectorXd& input,
                                const SystemParams& params, const Environment& env);

/// Builds the condensed QP from the model sequence (a single entry is held
/// across the horizon). Throws InfeasibleBounds when box bounds cross.
MpcProblem build_qp(const std::vector<LinearizedModel>& models, const MpcConfig& config,
                    const Eigen::VectorXd& reference_stack, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& previous_input, const SystemParams& params);

QpSolution solve_qp(const MpcProblem& problem, const MpcConfig& config);

struct ControlStepResult {
  std::vector<UgvInput> inputs;
  Eigen::VectorXd first_input_block;
  QpStatus status{QpStatus::kOptimal};
  int iterations{0};
  double cost{0.0};
  int active_count{0};
  bool failsafe{false};
};

/// One receding-horizon update: linearize at (state, previous input), build
/// and solve the QP, return the first input block with u_i3 forced to zero
/// and rover accelerations clipped to the bound. On solver failure the
/// previous inputs are returned decayed by 0.5.
ControlStepResult control_step(const SystemState& current, const ReferenceSchedule& refs,
                               const MpcConfig& config, const SystemParams& params,
                               const Environment& env, const Eigen::VectorXd& previous_input);

class LtvMpcController : public Controller {
 public:
  struct TraceRecord {
    double time{0.0};
    QpStatus status{QpStatus::kOptimal};
    bool failsafe{false};
    int iterations{0};
    double cost{0.0};
    int active_count{0};
    Eigen::VectorXd input;
  };

  LtvMpcController(MpcConfig config, SystemParams params, Environment env, ReferenceSchedule refs);

  double sample_time() const override { return config_.sample_time; }
  std::vector<UgvInput> update(const SystemState& state) override;

  int failsafe_count() const { return failsafe_count_; }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  const Eigen::VectorXd& previous_input() const { return previous_input_; }

 private:
  MpcConfig config_;
  SystemParams params_;
  Environment env_;
  ReferenceSchedule refs_;
  Eigen::VectorXd previous_input_;
  bool initialized_{false};
  int failsafe_count_{0};
  std::vector<TraceRecord> trace_;
};

}  // namespace tethersim
