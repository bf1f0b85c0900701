#include "tethersim/validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "tethersim/config.hpp"
#include "tethersim/mpc.hpp"
#include "tethersim/simulation.hpp"

namespace tethersim {

namespace {

constexpr double kPi = 3.14159265358979323846;

double mechanical_energy(const SystemState& s, const SystemParams& params, const Environment& env) {
  const BalloonParams& bp = params.balloon;
  const PayloadParams& pp = params.payload;
  const double m_eff = bp.effective_mass(env.air_density);
  const Vec3 omega = body_omega_from_euler_rates(s.balloon_payload.attitude,
                                                 s.balloon_payload.attitude_rate);
  const Vec3 v_p = payload_velocity(s.balloon_payload, bp, pp);
  const Vec3 r_p = payload_position(s.balloon_payload, bp, pp);
  return 0.5 * m_eff * s.balloon_payload.velocity.squaredNorm() +
         0.5 * omega.dot(bp.inertia_body * omega) + 0.5 * pp.mass * v_p.squaredNorm() -
         buoyancy_force(bp, env) * s.balloon_payload.position.z() +
         pp.mass * env.gravity * r_p.z();
}

CheckResult check_energy(bool fast) {
  ScenarioConfig c = ScenarioConfig::defaults();
  c.params.balloon.drag_coeff = 0.0;
  c.params.payload.drag_area = 0.0;
  // Neutral net lift so the floating system stays bounded without tethers.
  c.params.balloon.gas_density =
      c.environment.air_density -
      (c.params.balloon.structural_mass + c.params.payload.mass) / c.params.balloon.volume;

  SystemState state;
  state.balloon_payload.position = Vec3{0.0, 0.0, 2.0};
  state.balloon_payload.swing_rate = Vec2{0.6, 0.0};
  state.balloon_payload.velocity = Vec3{0.05, 0.0, 0.02};
  state.ugvs.resize(3);
  for (int i = 0; i < 3; ++i) {
    const Vec3 attach = tether_attachment(state.balloon_payload, c.params.balloon, i);
    state.ugvs[i].x = attach.x();
    state.ugvs[i].y = attach.y();  // directly below: tether slack
  }

  const double duration = fast ? 3.0 : 10.0;
  const double dt = 1e-3;
  const std::vector<UgvInput> zero(3);
  const double e0 = mechanical_energy(state, c.params, c.environment);
  const double kinetic0 = e0 + buoyancy_force(c.params.balloon, c.environment) *
                                   state.balloon_payload.position.z() -
                          c.params.payload.mass * c.environment.gravity *
                              payload_position(state.balloon_payload, c.params.balloon,
                                               c.params.payload)
                                  .z();
  double max_drift = 0.0;
  const long steps = std::lround(duration / dt);
  for (long k = 0; k < steps; ++k) {
    state = rk4_step(state, zero, dt, c.params, c.environment);
    max_drift = std::max(max_drift, std::abs(mechanical_energy(state, c.params, c.environment) - e0));
  }
  const double rel = max_drift / std::max(std::abs(kinetic0), 0.1);
  std::ostringstream detail;
  detail << "relative drift " << rel << " over " << duration << " s (bound 1e-3)";
  return {"energy_conservation", rel < 1e-3, detail.str()};
}

SystemState taut_state_with_violation(const ScenarioConfig& c, double rel_violation) {
  SystemState state;
  state.balloon_payload.position =
      c.initial.payload_position + Vec3{0.0, 0.0, c.params.payload.tether_length} -
      c.params.balloon.payload_attach;
  const double l = c.params.tether.ugv_tether_length * (1.0 + rel_violation);
  const int n = c.params.tether.count;
  state.ugvs.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vec3 attach = tether_attachment(state.balloon_payload, c.params.balloon, i);
    const double reach = std::sqrt(l * l - attach.z() * attach.z());
    const double az = std::atan2(c.params.balloon.ugv_attach[i].y(),
                                 c.params.balloon.ugv_attach[i].x());
    state.ugvs[i].x = attach.x() + reach * std::cos(az);
    state.ugvs[i].y = attach.y() + reach * std::sin(az);
  }
  return state;
}

double max_constraint_error(const ScenarioConfig& c, SystemState state, double duration,
                            double settle, bool shake) {
  const double dt = c.physics_dt;
  const long steps = std::lround(duration / dt);
  double worst = 0.0;
  std::vector<UgvInput> inputs(c.params.tether.count);
  for (long k = 0; k < steps; ++k) {
    const double t = state.time;
    if (shake) {
      // Gentle common-mode weave keeps tensions positive while exercising
      // the constraint rows.
      for (auto& u : inputs) {
        u.ax = 0.04 * std::sin(2.0 * kPi * t / 8.0);
        u.ay = 0.03 * std::sin(2.0 * kPi * t / 11.0);
      }
    }
    state = rk4_step(state, inputs, dt, c.params, c.environment);
    if (state.time < settle) continue;
    for (int i = 0; i < c.params.tether.count; ++i) {
      const double dist =
          tether_delta(state.balloon_payload, state.ugvs[i], c.params.balloon, i).norm();
      worst = std::max(worst, std::abs(dist - c.params.tether.ugv_tether_length));
    }
  }
  return worst;
}

CheckResult check_constraint_drift(bool fast) {
  ScenarioConfig c = ScenarioConfig::defaults();
  c.initial.payload_position = Vec3{0.0, 0.0, 0.3};
  SystemState state = make_initial_state(c);
  const double duration = fast ? 5.0 : 20.0;
  const double worst = max_constraint_error(c, state, duration, 0.0, true);
  const double bound = 1e-3 * c.params.tether.ugv_tether_length;
  std::ostringstream detail;
  detail << "max |dist - l_R| = " << worst << " m (bound " << bound << ")";
  return {"constraint_drift", worst < bound, detail.str()};
}

CheckResult check_baumgarte_negative_control(bool fast) {
  // With the stabilization gains zeroed an initial 2e-3 relative length
  // error must persist, so the drift bound has to fail.
  ScenarioConfig c = ScenarioConfig::defaults();
  c.params.constraint.baumgarte_alpha = 0.0;
  c.params.constraint.baumgarte_beta = 0.0;
  c.initial.payload_position = Vec3{0.0, 0.0, 0.3};
  SystemState state = taut_state_with_violation(c, 2e-3);
  const double duration = fast ? 4.0 : 8.0;
  const double worst = max_constraint_error(c, state, duration, 2.0, false);
  const double bound = 1e-3 * c.params.tether.ugv_tether_length;

  ScenarioConfig on = c;
  on.params.constraint = ConstraintSettings{};
  SystemState state_on = taut_state_with_violation(on, 2e-3);
  const double worst_on = max_constraint_error(on, state_on, duration, 2.0, false);

  const bool passed = worst >= bound && worst_on < bound;
  std::ostringstream detail;
  detail << "gains off: " << worst << " m, gains on: " << worst_on << " m (bound " << bound << ")";
  return {"baumgarte_negative_control", passed, detail.str()};
}

CheckResult check_pendulum_frequency(bool fast) {
  ScenarioConfig c = ScenarioConfig::defaults();
  // A heavy balloon pins the suspension point so the analytic frequency of
  // an ideal pendulum applies.
  c.params.balloon.structural_mass *= 1000.0;
  c.params.balloon.volume *= 1000.0;
  c.params.balloon.inertia_body *= 1000.0;
  c.params.balloon.drag_coeff = 0.0;
  c.params.payload.drag_area = 0.0;
  c.initial.payload_position = Vec3{0.0, 0.0, 0.2};

  SystemState state = make_initial_state(c);
  state.balloon_payload.swing = Vec2{0.02, 0.0};

  const double dt = c.physics_dt;
  const double duration = fast ? 6.0 : 10.0;
  const long steps = std::lround(duration / dt);
  const std::vector<UgvInput> zero(c.params.tether.count);
  std::vector<double> crossings;
  double prev_phi = state.balloon_payload.swing.x();
  double prev_t = 0.0;
  for (long k = 0; k < steps; ++k) {
    state = rk4_step(state, zero, dt, c.params, c.environment);
    const double phi = state.balloon_payload.swing.x();
    if (prev_phi != 0.0 && ((prev_phi < 0.0 && phi >= 0.0) || (prev_phi > 0.0 && phi <= 0.0))) {
      const double frac = prev_phi / (prev_phi - phi);
      crossings.push_back(prev_t + frac * dt);
    }
    prev_phi = phi;
    prev_t = state.time;
  }
  if (crossings.size() < 3) {
    return {"pendulum_frequency", false, "too few zero crossings"};
  }
  const double half_period =
      (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
  const double freq = 1.0 / (2.0 * half_period);
  const double expected =
      std::sqrt(c.environment.gravity / c.params.payload.tether_length) / (2.0 * kPi);
  const double rel = std::abs(freq - expected) / expected;
  std::ostringstream detail;
  detail << "measured " << freq << " Hz vs " << expected << " Hz (rel err " << rel << ")";
  return {"pendulum_frequency", rel < 0.01, detail.str()};
}

CheckResult check_jacobians(bool fast) {
  ScenarioConfig c = ScenarioConfig::defaults();
  c.initial.payload_position = Vec3{0.0, 0.0, 0.3};
  const SystemState base = make_initial_state(c);
  const int n = c.params.tether.count;

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int cases = fast ? 3 : 10;
  double worst = 0.0;
  for (int trial = 0; trial < cases; ++trial) {
    SystemState s = base;
    s.balloon_payload.position += 0.05 * Vec3{unif(rng), unif(rng), unif(rng)};
    s.balloon_payload.attitude.roll += 0.04 * unif(rng);
    s.balloon_payload.attitude.pitch += 0.04 * unif(rng);
    s.balloon_payload.attitude.yaw += 0.1 * unif(rng);
    s.balloon_payload.swing = Vec2{0.1 * unif(rng), 0.1 * unif(rng)};
    s.balloon_payload.velocity = 0.1 * Vec3{unif(rng), unif(rng), unif(rng)};
    s.balloon_payload.attitude_rate = 0.05 * Vec3{unif(rng), unif(rng), unif(rng)};
    s.balloon_payload.swing_rate = Vec2{0.2 * unif(rng), 0.2 * unif(rng)};
    for (int i = 0; i < n; ++i) {
      // Re-seat each rover on its taut sphere so the state stays feasible.
      const Vec3 attach = tether_attachment(s.balloon_payload, c.params.balloon, i);
      const double l = c.params.tether.ugv_tether_length;
      const double reach = std::sqrt(l * l - attach.z() * attach.z());
      const double az = std::atan2(c.params.balloon.ugv_attach[i].y(),
                                   c.params.balloon.ugv_attach[i].x()) +
                        0.3 * unif(rng);
      s.ugvs[i].x = attach.x() + reach * std::cos(az);
      s.ugvs[i].y = attach.y() + reach * std::sin(az);
      s.ugvs[i].vx = 0.1 * unif(rng);
      s.ugvs[i].vy = 0.1 * unif(rng);
    }

    Eigen::VectorXd u0(4 * n);
    const std::vector<UgvInput> zero(n);
    const TensionSolution sol =
        solve_constrained_dynamics(s.balloon_payload, s.ugvs, zero, c.params, c.environment);
    u0.head(n) = sol.ugv_tensions;
    for (int i = 0; i < 3 * n; ++i) u0(n + i) = 0.05 * unif(rng);

    auto f = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
      return mpc_model_derivative(x, u, c.params, c.environment);
    };
    const Eigen::VectorXd x0 = s.to_vector();
    const FdJacobians central = linearize(f, x0, u0);

    // Forward differences with a tenfold finer step as the reference.
    const Eigen::VectorXd f0 = f(x0, u0);
    for (int j = 0; j < x0.size(); ++j) {
      const double h = std::max(1e-6, 1e-6 * std::abs(x0(j))) / 10.0;
      Eigen::VectorXd xp = x0;
      xp(j) += h;
      const Eigen::VectorXd col = (f(xp, u0) - f0) / h;
      for (int r = 0; r < col.size(); ++r) {
        worst = std::max(worst,
                         std::abs(central.A(r, j) - col(r)) / (1.0 + std::abs(col(r))));
      }
    }
  }
  std::ostringstream detail;
  detail << "max relative discrepancy " << worst << " (bound 1e-4)";
  return {"jacobian_consistency", worst < 1e-4, detail.str()};
}

CheckResult check_qp_oracle(bool fast) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int cases = fast ? 5 : 20;
  double worst = 0.0;
  for (int trial = 0; trial < cases; ++trial) {
    const int nv = 8 + static_cast<int>(rng() % 13);
    Eigen::MatrixXd m(nv, nv);
    for (int i = 0; i < nv; ++i) {
      for (int j = 0; j < nv; ++j) m(i, j) = unif(rng);
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd eig(nv);
    for (int i = 0; i < nv; ++i) eig(i) = 1.0 + 99.0 * 0.5 * (unif(rng) + 1.0);
    const Eigen::MatrixXd h = q * eig.asDiagonal() * q.transpose();

    QpProblem qp;
    qp.hessian = 0.5 * (h + h.transpose());
    qp.gradient = Eigen::VectorXd::NullaryExpr(nv, [&](int) { return 3.0 * unif(rng); });
    Eigen::VectorXd lo(nv), hi(nv);
    for (int i = 0; i < nv; ++i) {
      const double a = 0.8 * unif(rng), b = 0.8 * unif(rng);
      lo(i) = std::min(a, b) - 0.05;
      hi(i) = std::max(a, b) + 0.05;
    }
    qp.ineq.resize(2 * nv, nv);
    qp.ineq_rhs.resize(2 * nv);
    qp.ineq << Eigen::MatrixXd::Identity(nv, nv), -Eigen::MatrixXd::Identity(nv, nv);
    qp.ineq_rhs << hi, -lo;
    qp.eq.resize(0, nv);
    qp.eq_rhs.resize(0);

    const QpSolution sol = solve_qp(qp, 500, 1e-9);

    // Projected gradient to a tight fixed point.
    const double step = 1.0 / eig.maxCoeff();
    Eigen::VectorXd z = 0.5 * (lo + hi);
    for (int it = 0; it < 200000; ++it) {
      const Eigen::VectorXd znew =
          (z - step * (qp.hessian * z + qp.gradient)).cwiseMax(lo).cwiseMin(hi);
      if ((znew - z).norm() < 1e-13 * (1.0 + z.norm())) {
        z = znew;
        break;
      }
      z = znew;
    }
    const double obj_pg = 0.5 * z.dot(qp.hessian * z) + qp.gradient.dot(z);
    worst = std::max(worst, std::abs(sol.objective - obj_pg) / (1.0 + std::abs(obj_pg)));
  }
  std::ostringstream detail;
  detail << "max objective gap " << worst << " (bound 1e-6)";
  return {"qp_oracle", worst < 1e-6, detail.str()};
}

}  // namespace

std::vector<CheckResult> run_validation_suite(bool fast) {
  std::vector<CheckResult> results;
  results.push_back(check_energy(fast));
  results.push_back(check_constraint_drift(fast));
  results.push_back(check_baumgarte_negative_control(fast));
  results.push_back(check_pendulum_frequency(fast));
  results.push_back(check_jacobians(fast));
  results.push_back(check_qp_oracle(fast));
  return results;
}

}  // namespace tethersim
