#include "tethersim/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tethersim/log.hpp"

namespace tethersim {

MpcConfig MpcConfig::defaults_for(int rover_count) {
  MpcConfig c;
  const int nu = 4 * rover_count;
  c.input_variation_weights = Eigen::VectorXd::Ones(nu);
  c.input_variation_weights.head(rover_count).setConstant(10.0);
  c.input_scales = Eigen::VectorXd::Constant(nu, 10.0);  // accelerations over 0.1 m/s^2
  c.input_scales.head(rover_count).setConstant(1.0 / 20.0);  // tensions over 20 N
  return c;
}

Eigen::Matrix<double, 5, 1> reference_at(const ReferenceSchedule& schedule, double t) {
  Eigen::Matrix<double, 5, 1> r = Eigen::Matrix<double, 5, 1>::Zero();
  if (schedule.empty()) return r;
  const ReferenceWaypoint* active = &schedule.front();
  for (const auto& wp : schedule) {
    if (wp.time <= t) active = &wp;
  }
  r.head<3>() = active->payload_position;
  r.tail<2>() = active->swing_rate;
  return r;
}

Eigen::VectorXd build_reference_stack(const ReferenceSchedule& schedule, double t0,
                                      const MpcConfig& config) {
  Eigen::VectorXd stack(5 * config.horizon);
  for (int k = 1; k <= config.horizon; ++k) {
    stack.segment<5>((k - 1) * 5) = reference_at(schedule, t0 + k * config.sample_time);
  }
  return stack;
}

FdJacobians linearize(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& u0) {
  const Eigen::VectorXd f0 = f(x0, u0);
  const int nf = static_cast<int>(f0.size());
  const int nx = static_cast<int>(x0.size());
  const int nu = static_cast<int>(u0.size());

  FdJacobians out;
  out.A.resize(nf, nx);
  out.B.resize(nf, nu);
  for (int j = 0; j < nx; ++j) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x0(j)));
    Eigen::VectorXd xp = x0, xm = x0;
    xp(j) += h;
    xm(j) -= h;
    out.A.col(j) = (f(xp, u0) - f(xm, u0)) / (2.0 * h);
  }
  for (int j = 0; j < nu; ++j) {
    const double h = std::max(1e-6, 1e-6 * std::abs(u0(j)));
    Eigen::VectorXd up = u0, um = u0;
    up(j) += h;
    um(j) -= h;
    out.B.col(j) = (f(x0, up) - f(x0, um)) / (2.0 * h);
  }
  out.residual = f0 - out.A * x0 - out.B * u0;
  return out;
}

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0) {
  const Eigen::VectorXd f0 = f(x0);
  Eigen::MatrixXd jac(f0.size(), x0.size());
  for (int j = 0; j < x0.size(); ++j) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x0(j)));
    Eigen::VectorXd xp = x0, xm = x0;
    xp(j) += h;
    xm(j) -= h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

namespace {

// exp(M) by 4th-order Taylor with scaling-and-squaring. The scaling target
// keeps the truncation error below ~1e-12 per factor.
Eigen::MatrixXd expm_taylor4(Eigen::MatrixXd m) {
  const int n = static_cast<int>(m.rows());
  double norm = 0.0;
  for (int i = 0; i < n; ++i) norm = std::max(norm, m.row(i).cwiseAbs().sum());
  int squarings = 0;
  while (norm > 0.01 && squarings < 40) {
    norm *= 0.5;
    ++squarings;
  }
  m /= std::pow(2.0, squarings);

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd p = identity + m * (identity + m * (identity + m * (identity + m / 4.0) / 3.0) / 2.0);
  for (int s = 0; s < squarings; ++s) p = p * p;
  return p;
}

}  // namespace

DiscreteModel discretize(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const Eigen::VectorXd& residual, double sample_time) {
  if (sample_time <= 0.0) {
    throw std::invalid_argument("discretize: sample_time must be positive");
  }
  const int nx = static_cast<int>(a.rows());
  const int nu = static_cast<int>(b.cols());
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(nx + nu + 1, nx + nu + 1);
  aug.topLeftCorner(nx, nx) = a;
  aug.block(0, nx, nx, nu) = b;
  aug.block(0, nx + nu, nx, 1) = residual;
  const Eigen::MatrixXd e = expm_taylor4(aug * sample_time);

  DiscreteModel d;
  d.A = e.topLeftCorner(nx, nx);
  d.B = e.block(0, nx, nx, nu);
  d.affine = e.block(0, nx + nu, nx, 1);
  return d;
}

Eigen::VectorXd mpc_model_derivative(const Eigen::VectorXd& state, const Eigen::VectorXd& input,
                                     const SystemParams& params, const Environment& env) {
  const int n = params.tether.count;
  const BalloonPayloadState bp = BalloonPayloadState::from_vector(state.head<16>());
  std::vector<UgvState> rovers(n);
  for (int i = 0; i < n; ++i) {
    rovers[i] = UgvState::from_vector(state.segment<6>(16 + 6 * i));
  }
  const Eigen::VectorXd tensions = input.head(n);
  const TensionSolution sol = solve_given_tensions(bp, rovers, tensions, params, env);

  Eigen::VectorXd d(state.size());
  d.head<16>() = derivative_from_solution(bp, sol);
  for (int i = 0; i < n; ++i) {
    const UgvInput u{input(n + 3 * i), input(n + 3 * i + 1), input(n + 3 * i + 2)};
    d.segment<6>(16 + 6 * i) = ckm_derivative(rovers[i], u);
  }
  return d;
}

Eigen::VectorXd mpc_model_output(const Eigen::VectorXd& state, const SystemParams& params) {
  const BalloonPayloadState bp = BalloonPayloadState::from_vector(state.head<16>());
  Eigen::VectorXd y(5);
  y.head<3>() = payload_position(bp, params.balloon, params.payload);
  y.tail<2>() = bp.swing_rate;
  return y;
}

double tether_constraint_value(const Eigen::VectorXd& state, int i, const SystemParams& params) {
  const BalloonPayloadState bp = BalloonPayloadState::from_vector(state.head<16>());
  const UgvState rover = UgvState::from_vector(state.segment<6>(16 + 6 * i));
  const double l = params.tether.ugv_tether_length;
  return tether_delta(bp, rover, params.balloon, i).squaredNorm() - l * l;
}

LinearizedModel linearize_plant(const SystemState& state, const Eigen::VectorXd& input,
                                const SystemParams& params, const Environment& env) {
  const Eigen::VectorXd x0 = state.to_vector();
  const int n = params.tether.count;

  LinearizedModel lin;
  const FdJacobians jac = linearize(
      [&](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        return mpc_model_derivative(x, u, params, env);
      },
      x0, input);
  lin.A = jac.A;
  lin.B = jac.B;
  lin.residual = jac.residual;

  lin.C = fd_jacobian([&](const Eigen::VectorXd& x) { return mpc_model_output(x, params); }, x0);
  lin.output_residual = mpc_model_output(x0, params) - lin.C * x0;

  lin.constraint_jacobian = fd_jacobian(
      [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd k(n);
        for (int i = 0; i < n; ++i) k(i) = tether_constraint_value(x, i, params);
        return k;
      },
      x0);
  lin.constraint_value.resize(n);
  for (int i = 0; i < n; ++i) lin.constraint_value(i) = tether_constraint_value(x0, i, params);

  lin.x0 = x0;
  lin.u0 = input;
  return lin;
}

MpcProblem build_qp(const std::vector<LinearizedModel>& models, const MpcConfig& config,
                    const Eigen::VectorXd& reference_stack, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& previous_input, const SystemParams& params) {
  if (models.empty()) throw std::invalid_argument("build_qp: no model");
  if (config.accel_bound <= 0.0 || config.rover_position_bound <= 0.0 ||
      config.rover_speed_bound <= 0.0 || (config.output_bounds.array() <= 0.0).any()) {
    throw InfeasibleBounds("build_qp: box bounds cross");
  }

  const int np = config.horizon;
  const int n = params.tether.count;
  const int nx = static_cast<int>(x0.size());
  const int nu = 4 * n;
  const int nz = np * nu;

  std::vector<DiscreteModel> disc;
  disc.reserve(models.size());
  for (const auto& m : models) {
    disc.push_back(discretize(m.A, m.B, m.residual, config.sample_time));
  }
  auto model_at = [&](int k) -> const LinearizedModel& {
    return models[std::min<size_t>(k, models.size() - 1)];
  };
  auto disc_at = [&](int k) -> const DiscreteModel& {
    return disc[std::min<size_t>(k, disc.size() - 1)];
  };

  // Prediction: X_k = psi_k x0 + Gamma_k z + gamma_k for k = 1..np.
  Eigen::MatrixXd gamma_stack = Eigen::MatrixXd::Zero(np * nx, nz);
  Eigen::MatrixXd psi_stack(np * nx, nx);
  Eigen::VectorXd free_stack(np * nx);
  {
    Eigen::MatrixXd psi = Eigen::MatrixXd::Identity(nx, nx);
    Eigen::VectorXd affine = Eigen::VectorXd::Zero(nx);
    for (int k = 1; k <= np; ++k) {
      const DiscreteModel& d = disc_at(k - 1);
      psi = d.A * psi;
      affine = d.A * affine + d.affine;
      if (k > 1) {
        gamma_stack.middleRows((k - 1) * nx, nx) =
            d.A * gamma_stack.middleRows((k - 2) * nx, nx);
      }
      gamma_stack.block((k - 1) * nx, (k - 1) * nu, nx, nu) = d.B;
      psi_stack.middleRows((k - 1) * nx, nx) = psi;
      free_stack.segment((k - 1) * nx, nx) = affine;
    }
  }

  const Eigen::VectorXd wy = (config.output_scales.array() * config.output_weights.array()).matrix();
  const Eigen::VectorXd wu =
      (config.input_scales.array() * config.input_variation_weights.array()).matrix();

  // Tracking term: rows Wy (C_k X_k + dy - r_k).
  Eigen::MatrixXd track_m(5 * np, nz);
  Eigen::VectorXd track_v(5 * np);
  for (int k = 1; k <= np; ++k) {
    const LinearizedModel& m = model_at(k - 1);
    const Eigen::MatrixXd cg = m.C * gamma_stack.middleRows((k - 1) * nx, nx);
    const Eigen::VectorXd yfree = m.C * (psi_stack.middleRows((k - 1) * nx, nx) * x0 +
                                         free_stack.segment((k - 1) * nx, nx)) +
                                  m.output_residual;
    for (int o = 0; o < 5; ++o) {
      track_m.row((k - 1) * 5 + o) = wy(o) * cg.row(o);
      track_v((k - 1) * 5 + o) = wy(o) * (yfree(o) - reference_stack((k - 1) * 5 + o));
    }
  }

  // Input-variation term: Wu (u_k - u_{k-1}), chained to the previous input.
  Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(nz, nz);
  Eigen::VectorXd diff_shift = Eigen::VectorXd::Zero(nz);
  for (int k = 0; k < np; ++k) {
    diff.block(k * nu, k * nu, nu, nu) = Eigen::MatrixXd::Identity(nu, nu);
    if (k > 0) {
      diff.block(k * nu, (k - 1) * nu, nu, nu) = -Eigen::MatrixXd::Identity(nu, nu);
    }
  }
  diff_shift.head(nu) = previous_input;
  Eigen::MatrixXd wdiff = diff;
  for (int k = 0; k < np; ++k) {
    for (int j = 0; j < nu; ++j) wdiff.row(k * nu + j) *= wu(j);
  }
  Eigen::VectorXd wshift = diff_shift;
  for (int j = 0; j < nu; ++j) wshift(j) *= wu(j);

  MpcProblem prob;
  prob.horizon = np;
  prob.input_dim = nu;
  prob.reference_stack = reference_stack;
  prob.previous_input = previous_input;

  Eigen::MatrixXd h = 2.0 * (track_m.transpose() * track_m + wdiff.transpose() * wdiff);
  h.diagonal().array() += config.hessian_regularization;
  prob.qp.hessian = 0.5 * (h + h.transpose());
  prob.qp.gradient = 2.0 * (track_m.transpose() * track_v - wdiff.transpose() * wshift);
  prob.cost_offset = track_v.squaredNorm() + wshift.squaredNorm();

  // Equalities: linearized tether-length constraints on each predicted state
  // plus pinned u_i3 = 0.
  const int eq_rows = np * n + np * n;
  prob.qp.eq = Eigen::MatrixXd::Zero(eq_rows, nz);
  prob.qp.eq_rhs = Eigen::VectorXd::Zero(eq_rows);
  int row = 0;
  for (int k = 1; k <= np; ++k) {
    const LinearizedModel& m = model_at(k - 1);
    const Eigen::VectorXd xfree =
        psi_stack.middleRows((k - 1) * nx, nx) * x0 + free_stack.segment((k - 1) * nx, nx);
    for (int i = 0; i < n; ++i) {
      const Eigen::RowVectorXd jac = m.constraint_jacobian.row(i);
      prob.qp.eq.row(row) = jac * gamma_stack.middleRows((k - 1) * nx, nx);
      prob.qp.eq_rhs(row) =
          jac.dot(m.x0) - m.constraint_value(i) - jac.dot(xfree);
      ++row;
    }
  }
  for (int k = 0; k < np; ++k) {
    for (int i = 0; i < n; ++i) {
      prob.qp.eq(row, k * nu + n + 3 * i + 2) = 1.0;
      prob.qp.eq_rhs(row) = 0.0;
      ++row;
    }
  }

  // Inequalities: tension nonnegativity, acceleration boxes, rover state
  // boxes and output boxes.
  std::vector<Eigen::RowVectorXd> grows;
  std::vector<double> gvals;
  auto push_row = [&](const Eigen::RowVectorXd& r, double v) {
    grows.push_back(r);
    gvals.push_back(v);
  };

  for (int k = 0; k < np; ++k) {
    for (int i = 0; i < n; ++i) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nz);
      r(k * nu + i) = -1.0;  // u_v >= 0
      push_row(r, 0.0);
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 2; ++j) {  // u_i3 is pinned by an equality row
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nz);
        r(k * nu + n + 3 * i + j) = 1.0;
        push_row(r, config.accel_bound);
        push_row(-r, config.accel_bound);
      }
    }
  }

  for (int k = 1; k <= np; ++k) {
    const Eigen::VectorXd xfree =
        psi_stack.middleRows((k - 1) * nx, nx) * x0 + free_stack.segment((k - 1) * nx, nx);
    const Eigen::MatrixXd& gk = gamma_stack.middleRows((k - 1) * nx, nx);
    for (int i = 0; i < n; ++i) {
      const int base = 16 + 6 * i;
      const std::pair<int, double> bounds[4] = {{base + 0, config.rover_position_bound},
                                                {base + 1, config.rover_position_bound},
                                                {base + 3, config.rover_speed_bound},
                                                {base + 4, config.rover_speed_bound}};
      for (const auto& [idx, bound] : bounds) {
        push_row(gk.row(idx), bound - xfree(idx));
        push_row(-gk.row(idx), bound + xfree(idx));
      }
    }
    const LinearizedModel& m = model_at(k - 1);
    const Eigen::MatrixXd cg = m.C * gk;
    const Eigen::VectorXd yfree = m.C * xfree + m.output_residual;
    for (int o = 0; o < 5; ++o) {
      push_row(cg.row(o), config.output_bounds(o) - yfree(o));
      push_row(-cg.row(o), config.output_bounds(o) + yfree(o));
    }
  }

  prob.qp.ineq.resize(static_cast<int>(grows.size()), nz);
  prob.qp.ineq_rhs.resize(static_cast<int>(gvals.size()));
  for (size_t i = 0; i < grows.size(); ++i) {
    prob.qp.ineq.row(static_cast<int>(i)) = grows[i];
    prob.qp.ineq_rhs(static_cast<int>(i)) = gvals[i];
  }
  return prob;
}

QpSolution solve_qp(const MpcProblem& problem, const MpcConfig& config) {
  return solve_qp(problem.qp, config.qp_max_iterations, config.qp_tolerance);
}

ControlStepResult control_step(const SystemState& current, const ReferenceSchedule& refs,
                               const MpcConfig& config, const SystemParams& params,
                               const Environment& env, const Eigen::VectorXd& previous_input) {
  const int n = params.tether.count;
  const int nu = 4 * n;
  ControlStepResult res;

  std::vector<LinearizedModel> models;
  try {
    if (!config.relinearize_along_horizon) {
      models.push_back(linearize_plant(current, previous_input, params, env));
    } else {
      // Propagate the nominal trajectory under the held previous input and
      // linearize at every horizon step.
      SystemState nominal = current;
      const int substeps = 20;
      for (int k = 0; k < config.horizon; ++k) {
        models.push_back(linearize_plant(nominal, previous_input, params, env));
        Eigen::VectorXd xv = nominal.to_vector();
        const double h = config.sample_time / substeps;
        for (int s = 0; s < substeps; ++s) {
          const Eigen::VectorXd k1 = mpc_model_derivative(xv, previous_input, params, env);
          const Eigen::VectorXd k2 = mpc_model_derivative(xv + 0.5 * h * k1, previous_input, params, env);
          const Eigen::VectorXd k3 = mpc_model_derivative(xv + 0.5 * h * k2, previous_input, params, env);
          const Eigen::VectorXd k4 = mpc_model_derivative(xv + h * k3, previous_input, params, env);
          xv += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        nominal = SystemState::from_vector(nominal.time + config.sample_time, xv,
                                           static_cast<int>(current.ugvs.size()));
      }
    }

    const Eigen::VectorXd ref_stack = build_reference_stack(refs, current.time, config);
    const MpcProblem prob =
        build_qp(models, config, ref_stack, current.to_vector(), previous_input, params);
    const QpSolution sol = solve_qp(prob, config);
    res.status = sol.status;
    res.iterations = sol.iterations;
    res.cost = sol.objective + prob.cost_offset;
    res.active_count = sol.active_inequalities;
    if (sol.status == QpStatus::kInfeasible) {
      res.failsafe = true;
    } else {
      res.first_input_block = sol.z.head(nu);
    }
  } catch (const std::exception&) {
    res.failsafe = true;
  }

  if (res.failsafe) {
    res.first_input_block = 0.5 * previous_input;
  }

  // Hard projection of the emitted block: tensions nonnegative, rover
  // accelerations inside the bound, u_i3 zero.
  for (int i = 0; i < n; ++i) {
    res.first_input_block(i) = std::max(0.0, res.first_input_block(i));
  }
  res.inputs.resize(n);
  for (int i = 0; i < n; ++i) {
    double ax = res.first_input_block(n + 3 * i);
    double ay = res.first_input_block(n + 3 * i + 1);
    ax = std::clamp(ax, -config.accel_bound, config.accel_bound);
    ay = std::clamp(ay, -config.accel_bound, config.accel_bound);
    res.first_input_block(n + 3 * i) = ax;
    res.first_input_block(n + 3 * i + 1) = ay;
    res.first_input_block(n + 3 * i + 2) = 0.0;
    res.inputs[i] = UgvInput{ax, ay, 0.0};
  }
  return res;
}

LtvMpcController::LtvMpcController(MpcConfig config, SystemParams params, Environment env,
                                   ReferenceSchedule refs)
    : config_(std::move(config)), params_(std::move(params)), env_(env), refs_(std::move(refs)) {
  const int nu = 4 * params_.tether.count;
  if (config_.input_variation_weights.size() != nu || config_.input_scales.size() != nu) {
    const MpcConfig defaults = MpcConfig::defaults_for(params_.tether.count);
    if (config_.input_variation_weights.size() != nu) {
      config_.input_variation_weights = defaults.input_variation_weights;
    }
    if (config_.input_scales.size() != nu) {
      config_.input_scales = defaults.input_scales;
    }
  }
}

std::vector<UgvInput> LtvMpcController::update(const SystemState& state) {
  const int n = params_.tether.count;
  const int nu = 4 * n;
  if (!initialized_) {
    previous_input_ = Eigen::VectorXd::Zero(nu);
    try {
      const std::vector<UgvInput> zero(n);
      const TensionSolution sol =
          solve_constrained_dynamics(state.balloon_payload, state.ugvs, zero, params_, env_);
      previous_input_.head(n) = sol.ugv_tensions;
    } catch (const std::exception&) {
      // Fall back to zero tensions; the first QP still regularizes through
      // the input-variation term.
    }
    initialized_ = true;
  }

  const ControlStepResult res =
      control_step(state, refs_, config_, params_, env_, previous_input_);
  previous_input_ = res.first_input_block;
  if (res.failsafe) {
    ++failsafe_count_;
    log_message(LogLevel::kError,
                "control step at t=" + std::to_string(state.time) +
                    " engaged the fail-safe (previous inputs decayed)");
  } else if (log_enabled(LogLevel::kDebug)) {
    log_message(LogLevel::kDebug, "t=" + std::to_string(state.time) +
                                      " qp iters=" + std::to_string(res.iterations) +
                                      " cost=" + std::to_string(res.cost) +
                                      " active=" + std::to_string(res.active_count));
  }

  TraceRecord rec;
  rec.time = state.time;
  rec.status = res.status;
  rec.failsafe = res.failsafe;
  rec.iterations = res.iterations;
  rec.cost = res.cost;
  rec.active_count = res.active_count;
  rec.input = res.first_input_block;
  trace_.push_back(std::move(rec));

  return res.inputs;
}

}  // namespace tethersim
