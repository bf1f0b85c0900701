#include "tethersim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tethersim/config.hpp"

namespace tethersim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Eigen::VectorXd SystemState::to_vector() const {
  Eigen::VectorXd v(dim());
  v.head<16>() = balloon_payload.to_vector();
  for (size_t i = 0; i < ugvs.size(); ++i) {
    v.segment<6>(16 + 6 * static_cast<int>(i)) = ugvs[i].to_vector();
  }
  return v;
}

SystemState SystemState::from_vector(double time, const Eigen::VectorXd& v, int ugv_count) {
  SystemState s;
  s.time = time;
  s.balloon_payload = BalloonPayloadState::from_vector(v.head<16>());
  s.ugvs.resize(ugv_count);
  for (int i = 0; i < ugv_count; ++i) {
    s.ugvs[i] = UgvState::from_vector(v.segment<6>(16 + 6 * i));
  }
  return s;
}

Environment apply_wind(const Environment& base, double t, const std::vector<GustSpec>& gusts) {
  Environment out = base;
  for (const GustSpec& g : gusts) {
    if (g.duration <= 0.0) continue;
    const double local = t - g.start;
    if (local <= 0.0 || local >= g.duration) continue;
    const double ramp = std::min(0.5, 0.5 * g.duration);
    double w = 1.0;
    if (local < ramp) {
      w = 0.5 * (1.0 - std::cos(kPi * local / ramp));
    } else if (local > g.duration - ramp) {
      w = 0.5 * (1.0 - std::cos(kPi * (g.duration - local) / ramp));
    }
    out.wind += w * g.velocity;
  }
  return out;
}

namespace {

Eigen::VectorXd full_derivative(const SystemState& state, const Eigen::VectorXd& y,
                                const std::vector<UgvInput>& inputs, const SystemParams& params,
                                const Environment& env) {
  const int n = static_cast<int>(state.ugvs.size());
  const BalloonPayloadState bp = BalloonPayloadState::from_vector(y.head<16>());
  std::vector<UgvState> rovers(n);
  for (int i = 0; i < n; ++i) rovers[i] = UgvState::from_vector(y.segment<6>(16 + 6 * i));

  Eigen::VectorXd d(y.size());
  d.head<16>() = state_derivative(bp, rovers, inputs, params, env);
  for (int i = 0; i < n; ++i) {
    d.segment<6>(16 + 6 * i) = ckm_derivative(rovers[i], inputs[i]);
  }
  return d;
}

}  // namespace

SystemState rk4_step(const SystemState& state, const std::vector<UgvInput>& inputs, double dt,
                     const SystemParams& params, const Environment& env,
                     const std::vector<GustSpec>& gusts) {
  if (dt <= 0.0 || dt > 0.01) {
    throw std::invalid_argument("rk4_step: dt must lie in (0, 0.01]");
  }
  const Eigen::VectorXd y0 = state.to_vector();
  const Environment env_0 = apply_wind(env, state.time, gusts);
  const Environment env_h = apply_wind(env, state.time + 0.5 * dt, gusts);
  const Environment env_1 = apply_wind(env, state.time + dt, gusts);

  const Eigen::VectorXd k1 = full_derivative(state, y0, inputs, params, env_0);
  const Eigen::VectorXd k2 = full_derivative(state, y0 + 0.5 * dt * k1, inputs, params, env_h);
  const Eigen::VectorXd k3 = full_derivative(state, y0 + 0.5 * dt * k2, inputs, params, env_h);
  const Eigen::VectorXd k4 = full_derivative(state, y0 + dt * k3, inputs, params, env_1);

  const Eigen::VectorXd y1 = y0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!y1.allFinite() || y1.cwiseAbs().maxCoeff() > 1e6) {
    throw NumericalBlowup("rk4_step: state magnitude exceeded 1e6");
  }
  return SystemState::from_vector(state.time + dt, y1, static_cast<int>(state.ugvs.size()));
}

std::vector<UgvInput> AccelProfile::at(double t) const {
  if (times.empty()) return {};
  auto it = std::upper_bound(times.begin(), times.end(), t);
  size_t idx = it == times.begin() ? 0 : static_cast<size_t>(it - times.begin() - 1);
  return samples[idx];
}

void AccelProfile::validate(double duration, int rover_count) const {
  if (times.empty()) throw ProfileGap("profile is empty");
  if (samples.size() != times.size()) throw ProfileGap("profile times/samples mismatch");
  for (const auto& row : samples) {
    if (static_cast<int>(row.size()) != rover_count) {
      throw ProfileGap("profile rover count mismatch");
    }
  }
  if (times.size() == 1) {
    return;  // single-sample profile holds one value throughout
  }
  const double dt0 = times[1] - times[0];
  if (dt0 <= 0.0) throw ProfileGap("profile times must increase");
  for (size_t i = 1; i < times.size(); ++i) {
    const double gap = times[i] - times[i - 1];
    if (gap <= 0.0) throw ProfileGap("profile times must increase");
    if (gap > 2.0 * dt0) throw ProfileGap("profile sampling gap exceeds 2x the profile step");
  }
  if (times.back() + 2.0 * dt0 < duration) {
    throw ProfileGap("profile ends before the run duration");
  }
}

BalloonPayloadState refine_equilibrium(const BalloonPayloadState& guess,
                                       const std::vector<UgvState>& rovers,
                                       const SystemParams& params, const Environment& env,
                                       double tol, int max_iterations) {
  const int n = static_cast<int>(rovers.size());
  const int nq = 9 + n;  // pose (8) + payload tension + rover tensions
  const std::vector<UgvInput> zero_inputs(n);
  const std::vector<bool> engaged(n, true);

  auto state_of = [&](const Eigen::VectorXd& q) {
    BalloonPayloadState s;
    s.position = q.segment<3>(0);
    s.attitude = EulerAngles{q(3), q(4), q(5)};
    s.swing = q.segment<2>(6);
    return s;
  };

  // Residuals: dynamics rows at zero acceleration with the candidate
  // tensions, plus the position-level tether length constraints.
  auto residual = [&](const Eigen::VectorXd& q) {
    const BalloonPayloadState s = state_of(q);
    const ConstrainedSystem sys =
        assemble_constrained_system(s, rovers, zero_inputs, params, env, engaged);
    Eigen::VectorXd unknowns = Eigen::VectorXd::Zero(9 + n);
    unknowns.segment(8, 1 + n) = q.segment(8, 1 + n);
    Eigen::VectorXd r(nq);
    r.head(9) = sys.A.topRows(9) * unknowns - sys.b.head(9);
    const double l = params.tether.ugv_tether_length;
    for (int i = 0; i < n; ++i) {
      r(9 + i) = tether_delta(s, rovers[i], params.balloon, i).squaredNorm() - l * l;
    }
    return r;
  };

  Eigen::VectorXd q(nq);
  q.segment<3>(0) = guess.position;
  q(3) = guess.attitude.roll;
  q(4) = guess.attitude.pitch;
  q(5) = guess.attitude.yaw;
  q.segment<2>(6) = guess.swing;
  q(8) = params.payload.mass * env.gravity;
  q.segment(9, n).setConstant(1.0);

  Eigen::VectorXd r = residual(q);
  for (int it = 0; it < max_iterations; ++it) {
    if (r.norm() < tol) break;
    Eigen::MatrixXd jac(nq, nq);
    for (int j = 0; j < nq; ++j) {
      const double h = std::max(1e-7, 1e-7 * std::abs(q(j)));
      Eigen::VectorXd qp = q, qm = q;
      qp(j) += h;
      qm(j) -= h;
      jac.col(j) = (residual(qp) - residual(qm)) / (2.0 * h);
    }
    Eigen::VectorXd step;
    try {
      step = solve_dense_linear(jac, -r);
    } catch (const SingularMatrix&) {
      throw InfeasibleInitialState("equilibrium pre-solve: singular Jacobian");
    }
    // Backtracking keeps the iteration from overshooting.
    double scale = 1.0;
    for (int bt = 0; bt < 8; ++bt) {
      const Eigen::VectorXd q_new = q + scale * step;
      const Eigen::VectorXd r_new = residual(q_new);
      if (r_new.norm() < r.norm() || r_new.norm() < tol) {
        q = q_new;
        r = r_new;
        break;
      }
      scale *= 0.5;
      if (bt == 7) {
        q += scale * step;
        r = residual(q);
      }
    }
  }
  if (r.norm() >= tol) {
    throw InfeasibleInitialState("equilibrium pre-solve did not converge");
  }

  BalloonPayloadState out = state_of(q);
  return out;
}

SystemState make_initial_state(const ScenarioConfig& config) {
  const SystemParams& params = config.params;
  const BalloonParams& bp = params.balloon;
  const int n = params.tether.count;
  if (static_cast<int>(bp.ugv_attach.size()) != n) {
    throw InfeasibleInitialState("attachment count does not match rover count");
  }

  SystemState state;
  state.time = 0.0;
  state.balloon_payload = BalloonPayloadState{};
  // Straight-hanging payload: balloon directly above the payload target.
  state.balloon_payload.position =
      config.initial.payload_position + Vec3{0.0, 0.0, params.payload.tether_length} -
      bp.payload_attach;

  const double l_r = params.tether.ugv_tether_length;
  state.ugvs.resize(n);
  if (config.initial.rover_positions.has_value()) {
    const auto& pos = *config.initial.rover_positions;
    if (static_cast<int>(pos.size()) != n) {
      throw InfeasibleInitialState("explicit rover positions count mismatch");
    }
    for (int i = 0; i < n; ++i) {
      state.ugvs[i].x = pos[i].x();
      state.ugvs[i].y = pos[i].y();
    }
  } else {
    // Place each rover on the ground circle that keeps its tether exactly
    // taut, walking outward from the attachment along the given azimuth.
    std::vector<double> azimuths = config.initial.rover_azimuths_deg;
    if (azimuths.empty()) {
      for (int i = 0; i < n; ++i) {
        azimuths.push_back(std::atan2(bp.ugv_attach[i].y(), bp.ugv_attach[i].x()) * 180.0 / kPi);
      }
    }
    if (static_cast<int>(azimuths.size()) != n) {
      throw InfeasibleInitialState("rover azimuth count mismatch");
    }
    for (int i = 0; i < n; ++i) {
      const Vec3 attach = tether_attachment(state.balloon_payload, bp, i);
      if (attach.z() <= 0.0 || attach.z() >= l_r) {
        throw InfeasibleInitialState("tether cannot reach the ground plane taut");
      }
      const double reach = std::sqrt(l_r * l_r - attach.z() * attach.z());
      const double az = azimuths[i] * kPi / 180.0;
      state.ugvs[i].x = attach.x() + reach * std::cos(az);
      state.ugvs[i].y = attach.y() + reach * std::sin(az);
    }
  }
  for (int i = 0; i < n; ++i) {
    state.ugvs[i].heading = i < static_cast<int>(config.initial.rover_headings_deg.size())
                                ? config.initial.rover_headings_deg[i] * kPi / 180.0
                                : 0.0;
  }

  bool all_taut = true;
  for (int i = 0; i < n; ++i) {
    const double dist = tether_delta(state.balloon_payload, state.ugvs[i], bp, i).norm();
    if (dist > 1.05 * l_r) {
      throw InfeasibleInitialState("initial tether overstretched beyond the 5% band");
    }
    if (dist < l_r * (1.0 - params.constraint.engage_band)) all_taut = false;
  }

  if (all_taut) {
    state.balloon_payload =
        refine_equilibrium(state.balloon_payload, state.ugvs, params, config.environment);
  }
  return state;
}

namespace {

TelemetryRecord make_record(const SystemState& state, const std::vector<UgvInput>& inputs,
                            const ScenarioConfig& config) {
  TelemetryRecord rec;
  rec.time = state.time;
  rec.payload_position =
      payload_position(state.balloon_payload, config.params.balloon, config.params.payload);
  rec.swing_rate = state.balloon_payload.swing_rate;
  rec.swing = state.balloon_payload.swing;
  rec.balloon_position = state.balloon_payload.position;
  rec.balloon_attitude = state.balloon_payload.attitude;
  rec.ugvs = state.ugvs;
  const Environment env = apply_wind(config.environment, state.time, config.gusts);
  const TensionSolution sol =
      solve_constrained_dynamics(state.balloon_payload, state.ugvs, inputs, config.params, env);
  rec.payload_tension = sol.payload_tension;
  rec.ugv_tensions = sol.ugv_tensions;
  rec.slack = sol.slack;
  rec.inputs = inputs;
  return rec;
}

std::vector<TelemetryRecord> run_loop(const ScenarioConfig& config, SystemState state,
                                      Controller* controller, const AccelProfile* profile) {
  const double dt = config.physics_dt;
  const long n_steps = std::lround(config.duration / dt);
  const long telemetry_every =
      std::max(1L, std::lround(1.0 / (config.telemetry_rate * dt)));
  long control_every = 0;
  if (controller != nullptr) {
    control_every = std::max(1L, std::lround(controller->sample_time() / dt));
  }

  std::vector<UgvInput> inputs(state.ugvs.size());
  std::vector<TelemetryRecord> records;
  records.reserve(static_cast<size_t>(n_steps / telemetry_every + 2));

  for (long k = 0; k < n_steps; ++k) {
    if (controller != nullptr && k % control_every == 0) {
      inputs = controller->update(state);
    }
    if (profile != nullptr) {
      inputs = profile->at(state.time);
    }
    if (k % telemetry_every == 0) {
      records.push_back(make_record(state, inputs, config));
    }
    state = rk4_step(state, inputs, dt, config.params, config.environment, config.gusts);
  }
  records.push_back(make_record(state, inputs, config));
  return records;
}

}  // namespace

std::vector<TelemetryRecord> run_scenario(const ScenarioConfig& config, Controller* controller) {
  const SystemState state = make_initial_state(config);
  return run_loop(config, state, controller, nullptr);
}

std::vector<TelemetryRecord> replay_inputs(const ScenarioConfig& config,
                                           const AccelProfile& profile) {
  const int n = config.params.tether.count;
  profile.validate(config.duration, n);

  AccelProfile driven = profile;
  if (config.replay_slip_noise > 0.0) {
    // Optional wheel-slip style disturbance, seeded for reproducibility.
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, config.replay_slip_noise);
    for (auto& row : driven.samples) {
      for (auto& u : row) {
        u.ax += noise(rng);
        u.ay += noise(rng);
      }
    }
  }

  const SystemState state = make_initial_state(config);
  return run_loop(config, state, nullptr, &driven);
}

}  // namespace tethersim
