#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "support/test_helpers.hpp"
#include "tethersim/dynamics.hpp"
#include "tethersim/simulation.hpp"

using namespace tethersim;
using namespace tethersim::testing;

TEST_CASE("buoyancy vanishes for a massless neutral envelope") {
  BalloonParams bp = default_params().balloon;
  Environment env;
  bp.gas_density = env.air_density;
  bp.structural_mass = 1e-300;  // type invariant wants > 0
  CHECK(buoyancy_force(bp, env) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("buoyancy of the 2.2 m helium balloon is about 21.9 N") {
  BalloonParams bp = default_params().balloon;
  bp.volume = 5.575;
  const Environment env;
  const double f = buoyancy_force(bp, env);
  // Direct arithmetic: (1.225 - 0.1786) * 5.575 * 9.81 - 3.6 * 9.81.
  CHECK(f == doctest::Approx((1.225 - 0.1786) * 5.575 * 9.81 - 3.6 * 9.81).epsilon(1e-12));
  CHECK(f == doctest::Approx(21.9).epsilon(0.005));
  // Spare lift consistent with a payload capability of up to 2 kg.
  CHECK(f / env.gravity > 2.0);
  CHECK(f / env.gravity < 2.5);
}

TEST_CASE("drag is zero at rest and quadratic otherwise") {
  CHECK(drag_force(Vec3::Zero(), 1.225, 1.787).norm() == 0.0);
  const Vec3 f = drag_force(Vec3{1.0, 0.0, 0.0}, 1.225, 1.787);
  CHECK(f.x() == doctest::Approx(-0.5 * 1.225 * 1.787).epsilon(1e-12));
  CHECK(f.x() == doctest::Approx(-1.094).epsilon(5e-4));
  CHECK(f.y() == 0.0);
  CHECK(f.z() == 0.0);
}

TEST_CASE("drag is an odd function of velocity") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const Vec3 v{unif(rng), unif(rng), unif(rng)};
    CHECK((drag_force(-v, 1.225, 0.5) + drag_force(v, 1.225, 0.5)).norm() < 1e-12);
  }
}

TEST_CASE("payload direction at rest points straight down") {
  const Vec3 e = payload_direction(Vec2{0.0, 0.0});
  CHECK((e - Vec3{0.0, 0.0, -1.0}).norm() < 1e-15);
}

TEST_CASE("payload direction approaches +x near theta = pi/2") {
  const Vec3 e = payload_direction(Vec2{0.0, kPi / 2.0 - 1e-6});
  CHECK(e.x() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(e.y()) < 1e-9);
}

TEST_CASE("payload direction stays unit length") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    CHECK(payload_direction(Vec2{unif(rng), unif(rng)}).norm() ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("payload position matches the attachment chain arithmetic") {
  const SystemParams p = default_params();
  BalloonPayloadState x;
  x.position = Vec3{0.0, 0.0, 2.0};
  const Vec3 r = payload_position(x, p.balloon, p.payload);
  CHECK((r - Vec3{0.0, 0.0, 0.1}).norm() < 1e-12);
}

TEST_CASE("translating the balloon translates the payload exactly") {
  const SystemParams p = default_params();
  BalloonPayloadState x;
  x.position = Vec3{0.2, -0.4, 2.1};
  x.attitude = EulerAngles{0.1, -0.2, 0.7};
  x.swing = Vec2{0.3, -0.1};
  const Vec3 base = payload_position(x, p.balloon, p.payload);
  const Vec3 shift{1.5, -2.0, 0.25};
  BalloonPayloadState moved = x;
  moved.position += shift;
  CHECK((payload_position(moved, p.balloon, p.payload) - base - shift).norm() < 1e-12);
}

TEST_CASE("payload velocity matches finite differences of payload position") {
  const SystemParams p = default_params();
  BalloonPayloadState x;
  x.position = Vec3{0.1, 0.2, 2.0};
  x.attitude = EulerAngles{0.05, -0.1, 0.4};
  x.swing = Vec2{0.2, -0.15};
  x.velocity = Vec3{0.3, -0.1, 0.2};
  x.attitude_rate = Vec3{0.2, 0.1, -0.3};
  x.swing_rate = Vec2{0.4, 0.25};

  const double eps = 1e-7;
  auto advance = [&](double h) {
    BalloonPayloadState y = x;
    y.position += h * x.velocity;
    y.attitude.roll += h * x.attitude_rate.x();
    y.attitude.pitch += h * x.attitude_rate.y();
    y.attitude.yaw += h * x.attitude_rate.z();
    y.swing += h * x.swing_rate;
    return payload_position(y, p.balloon, p.payload);
  };
  const Vec3 fd = (advance(eps) - advance(-eps)) / (2.0 * eps);
  CHECK((payload_velocity(x, p.balloon, p.payload) - fd).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("static symmetric equilibrium reproduces the force-balance oracle") {
  const SystemParams p = default_params();
  const Environment env;
  const SystemState s = symmetric_taut_state(p, 0.3);
  const std::vector<UgvInput> zero(3);

  const TensionSolution sol =
      solve_constrained_dynamics(s.balloon_payload, s.ugvs, zero, p, env);

  // Independent statics: vertical balance with equal tensions by symmetry.
  const double f_b = buoyancy_force(p.balloon, env);
  const double weight = p.payload.mass * env.gravity;
  const Vec3 attach = tether_attachment(s.balloon_payload, p.balloon, 0);
  // Unit tether direction has z-component -attach.z / l_R (rover on the
  // ground); the three vertical components balance the remaining lift.
  const double ez = -attach.z() / p.tether.ugv_tether_length;
  const double expected_tension = (f_b - weight) / (3.0 * -ez);

  CHECK(sol.payload_tension == doctest::Approx(weight).epsilon(1e-9));
  for (int i = 0; i < 3; ++i) {
    CHECK(sol.slack[i] == false);
    CHECK(sol.ugv_tensions(i) == doctest::Approx(expected_tension).epsilon(1e-9));
  }

  // Vertical tether components sum to the net lift left after the payload.
  double vertical = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Vec3 delta = tether_delta(s.balloon_payload, s.ugvs[i], p.balloon, i);
    vertical += sol.ugv_tensions(i) * (delta.z() / delta.norm());
  }
  CHECK(std::abs(vertical + (f_b - weight)) < 1e-6);

  CHECK(sol.linear_accel.norm() < 1e-9);
  CHECK(sol.body_omega_dot.norm() < 1e-9);
  CHECK(sol.swing_accel.norm() < 1e-9);

  const auto d = state_derivative(s.balloon_payload, s.ugvs, zero, p, env);
  CHECK(d.norm() < 1e-9);
}

TEST_CASE("slack rovers reduce the balloon to a free buoyant body") {
  const SystemParams p = default_params();
  const Environment env;
  SystemState s = slack_tether_state(p, 2.0);
  s.balloon_payload.velocity = Vec3{0.4, -0.2, 0.1};
  const std::vector<UgvInput> zero(3);

  const TensionSolution sol =
      solve_constrained_dynamics(s.balloon_payload, s.ugvs, zero, p, env);
  for (int i = 0; i < 3; ++i) {
    CHECK(sol.slack[i] == true);
    CHECK(sol.ugv_tensions(i) == 0.0);
  }

  // Translational row recomputed by hand with the solved payload tension.
  const Vec3 drag = drag_force(s.balloon_payload.velocity - env.wind, env.air_density,
                               p.balloon.drag_coeff * p.balloon.reference_area);
  const Vec3 expected =
      (drag + Vec3{0.0, 0.0, buoyancy_force(p.balloon, env)} +
       sol.payload_tension * payload_direction(s.balloon_payload.swing)) /
      p.balloon.effective_mass(env.air_density);
  CHECK((sol.linear_accel - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("assembled solution satisfies every row to 1e-9") {
  const SystemParams p = default_params();
  const Environment env;
  SystemState s = symmetric_taut_state(p, 0.3);
  s.balloon_payload.velocity = Vec3{0.05, -0.02, 0.01};
  s.balloon_payload.swing_rate = Vec2{0.3, -0.2};
  std::vector<UgvInput> inputs(3);
  inputs[0] = UgvInput{0.05, 0.0, 0.0};
  inputs[1] = UgvInput{-0.03, 0.02, 0.0};

  const ConstrainedSystem sys = assemble_constrained_system(
      s.balloon_payload, s.ugvs, inputs, p, env, std::vector<bool>(3, true));
  const Eigen::VectorXd u = solve_dense_linear(sys.A, sys.b);
  CHECK((sys.A * u - sys.b).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("a rover driven at the balloon clamps its tension to zero") {
  SystemParams p = default_params();
  const Environment env;
  // Net lift trimmed to 0.6 N so the nominal tensions are small.
  p.balloon.gas_density =
      env.air_density -
      (p.balloon.structural_mass + p.payload.mass + 0.6 / env.gravity) / p.balloon.volume;

  const SystemState s = symmetric_taut_state(p, 0.3);
  std::vector<UgvInput> inputs(3);
  // Rover 1 accelerates straight at the balloon.
  const Vec3 attach = tether_attachment(s.balloon_payload, p.balloon, 0);
  const Vec2 inward = Vec2{attach.x() - s.ugvs[0].x, attach.y() - s.ugvs[0].y}.normalized();
  inputs[0] = UgvInput{0.1 * inward.x(), 0.1 * inward.y(), 0.0};

  const ConstrainedSystem sys = assemble_constrained_system(
      s.balloon_payload, s.ugvs, inputs, p, env, std::vector<bool>(3, true));
  const Eigen::VectorXd raw = solve_dense_linear(sys.A, sys.b);
  REQUIRE(raw(9) < 0.0);  // unclamped solution pulls the tether negative

  const TensionSolution sol = solve_tensions(sys);
  CHECK(sol.slack[0] == true);
  CHECK(sol.ugv_tensions(0) == 0.0);
  CHECK(sol.ugv_tensions(1) >= 0.0);
  CHECK(sol.ugv_tensions(2) >= 0.0);

  // Complementarity sanity: clamping never violates the constraint rows more
  // than declaring every tether slack.
  auto violation = [&](const TensionSolution& t) {
    Eigen::VectorXd u(12);
    u.segment<3>(0) = t.linear_accel;
    u.segment<3>(3) = t.body_omega_dot;
    u.segment<2>(6) = t.swing_accel;
    u(8) = t.payload_tension;
    u.segment<3>(9) = t.ugv_tensions;
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double r = sys.A.row(9 + i).dot(u) - sys.b(9 + i);
      total += r * r;
    }
    return total;
  };
  const ConstrainedSystem sys_slack = assemble_constrained_system(
      s.balloon_payload, s.ugvs, inputs, p, env, std::vector<bool>(3, false));
  const TensionSolution all_slack = solve_tensions(sys_slack);
  CHECK(violation(sol) <= violation(all_slack) + 1e-12);
}

TEST_CASE("added mass appears only in the translational rows") {
  SystemParams p = default_params();
  const Environment env;
  const SystemState s = symmetric_taut_state(p, 0.3);
  const std::vector<UgvInput> zero(3);

  ConstrainedSystem sys = assemble_constrained_system(s.balloon_payload, s.ugvs, zero, p, env,
                                                      std::vector<bool>(3, true));
  const double m_eff = p.balloon.effective_mass(env.air_density);
  CHECK(sys.A(0, 0) == doctest::Approx(m_eff).epsilon(1e-12));
  CHECK(m_eff == doctest::Approx(p.balloon.structural_mass +
                                 p.balloon.gas_density * p.balloon.volume +
                                 0.5 * env.air_density * p.balloon.volume)
                     .epsilon(1e-12));
  CHECK((sys.A.block<3, 3>(3, 3) - p.balloon.inertia_body).cwiseAbs().maxCoeff() < 1e-12);

  p.balloon.added_mass_coeff = 0.0;
  p.balloon.gas_density = 0.0;
  sys = assemble_constrained_system(s.balloon_payload, s.ugvs, zero, p, env,
                                    std::vector<bool>(3, true));
  CHECK(sys.A(0, 0) == doctest::Approx(p.balloon.structural_mass).epsilon(1e-12));
  CHECK((sys.A.block<3, 3>(3, 3) - p.balloon.inertia_body).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("state derivative is equivariant under rotations about z") {
  const SystemParams p = default_params();
  Environment env;
  env.wind = Vec3{0.3, -0.1, 0.0};

  SystemState s = symmetric_taut_state(p, 0.3);
  s.balloon_payload.velocity = Vec3{0.1, 0.05, -0.02};
  s.balloon_payload.attitude_rate = Vec3{0.02, -0.03, 0.05};
  s.balloon_payload.swing = Vec2{0.1, -0.08};
  s.balloon_payload.swing_rate = Vec2{0.2, 0.1};
  for (int i = 0; i < 3; ++i) {
    s.ugvs[i].vx = 0.04 * (i + 1);
    s.ugvs[i].vy = -0.02 * (i + 1);
  }
  std::vector<UgvInput> inputs(3);
  inputs[0] = UgvInput{0.05, 0.02, 0.0};
  inputs[1] = UgvInput{-0.01, 0.03, 0.0};
  inputs[2] = UgvInput{0.02, -0.04, 0.0};

  const double gamma = 0.83;
  Eigen::Matrix2d rz2;
  rz2 << std::cos(gamma), -std::sin(gamma), std::sin(gamma), std::cos(gamma);
  Mat3 rz = Mat3::Identity();
  rz.topLeftCorner<2, 2>() = rz2;

  // Swing angles of the rotated payload direction and the matching rates.
  auto swing_of = [](const Vec3& e) {
    return Vec2{std::atan2(-e.y(), -e.z()), std::asin(e.x())};
  };
  const Vec3 e0 = payload_direction(s.balloon_payload.swing);
  const double eps = 1e-7;
  const Vec3 e0_dot = (payload_direction(s.balloon_payload.swing + eps * s.balloon_payload.swing_rate) -
                       payload_direction(s.balloon_payload.swing - eps * s.balloon_payload.swing_rate)) /
                      (2.0 * eps);

  SystemState r = s;
  r.balloon_payload.position = rz * s.balloon_payload.position;
  r.balloon_payload.velocity = rz * s.balloon_payload.velocity;
  r.balloon_payload.attitude.yaw += gamma;
  r.balloon_payload.swing = swing_of(rz * e0);
  // Rates from d/dt of the rotated direction via the parameterization columns.
  {
    const Vec3 ed = rz * e0_dot;
    const Vec2 sw = r.balloon_payload.swing;
    const Vec3 col_phi{0.0, -std::cos(sw.x()) * std::cos(sw.y()),
                       std::sin(sw.x()) * std::cos(sw.y())};
    const Vec3 col_theta{std::cos(sw.y()), std::sin(sw.x()) * std::sin(sw.y()),
                         std::cos(sw.x()) * std::sin(sw.y())};
    Eigen::Matrix<double, 3, 2> j;
    j.col(0) = col_phi;
    j.col(1) = col_theta;
    r.balloon_payload.swing_rate = (j.transpose() * j).ldlt().solve(j.transpose() * ed);
  }
  std::vector<UgvInput> rotated_inputs(3);
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d pos = rz2 * Eigen::Vector2d{s.ugvs[i].x, s.ugvs[i].y};
    const Eigen::Vector2d vel = rz2 * Eigen::Vector2d{s.ugvs[i].vx, s.ugvs[i].vy};
    const Eigen::Vector2d acc = rz2 * Eigen::Vector2d{inputs[i].ax, inputs[i].ay};
    r.ugvs[i].x = pos.x();
    r.ugvs[i].y = pos.y();
    r.ugvs[i].vx = vel.x();
    r.ugvs[i].vy = vel.y();
    rotated_inputs[i] = UgvInput{acc.x(), acc.y(), 0.0};
  }
  Environment env_r = env;
  env_r.wind = rz * env.wind;

  const TensionSolution sol = solve_constrained_dynamics(s.balloon_payload, s.ugvs, inputs, p, env);
  const TensionSolution sol_r =
      solve_constrained_dynamics(r.balloon_payload, r.ugvs, rotated_inputs, p, env_r);

  CHECK((sol_r.linear_accel - rz * sol.linear_accel).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((sol_r.body_omega_dot - sol.body_omega_dot).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(sol_r.payload_tension == doctest::Approx(sol.payload_tension).epsilon(1e-8));
  for (int i = 0; i < 3; ++i) {
    CHECK(sol_r.ugv_tensions(i) == doctest::Approx(sol.ugv_tensions(i)).epsilon(1e-8));
  }

  // Swing accelerations compared through the rotated second derivative of
  // the payload direction.
  auto dir_accel = [&](const SystemState& state, const TensionSolution& solution) {
    const Vec2 sw = state.balloon_payload.swing;
    const Vec2 swr = state.balloon_payload.swing_rate;
    const double e2 = 1e-5;
    const Vec3 up = payload_direction(sw + e2 * swr + 0.5 * e2 * e2 * solution.swing_accel);
    const Vec3 mid = payload_direction(sw);
    const Vec3 dn = payload_direction(sw - e2 * swr + 0.5 * e2 * e2 * solution.swing_accel);
    return (up - 2.0 * mid + dn) / (e2 * e2);
  };
  CHECK((dir_accel(r, sol_r) - rz * dir_accel(s, sol)).cwiseAbs().maxCoeff() < 2e-4);
}

TEST_CASE("energy stays constant per RK4 step in the drag-free slack mode") {
  SystemParams p = default_params();
  Environment env;
  p.balloon.drag_coeff = 0.0;
  p.payload.drag_area = 0.0;
  p.balloon.gas_density =
      env.air_density - (p.balloon.structural_mass + p.payload.mass) / p.balloon.volume;

  SystemState s = slack_tether_state(p, 2.0);
  s.balloon_payload.swing_rate = Vec2{0.6, 0.0};
  s.balloon_payload.velocity = Vec3{0.05, 0.0, 0.02};
  const std::vector<UgvInput> zero(3);

  double e_prev = mechanical_energy(s, p, env);
  const double scale = std::max(1.0, std::abs(e_prev));
  for (int k = 0; k < 2000; ++k) {
    s = rk4_step(s, zero, 1e-3, p, env);
    const double e = mechanical_energy(s, p, env);
    CHECK(std::abs(e - e_prev) < 1e-6 * scale);
    e_prev = e;
  }
}

TEST_CASE("small payload swings oscillate at the pendulum frequency") {
  SystemParams p = default_params();
  const Environment env;
  // Heavy balloon pins the suspension point.
  p.balloon.structural_mass *= 1000.0;
  p.balloon.volume *= 1000.0;
  p.balloon.inertia_body *= 1000.0;
  p.balloon.drag_coeff = 0.0;
  p.payload.drag_area = 0.0;

  SystemState s = symmetric_taut_state(p, 0.2);
  s.balloon_payload.swing = Vec2{0.02, 0.0};
  const std::vector<UgvInput> zero(3);

  std::vector<double> crossings;
  double prev_phi = s.balloon_payload.swing.x();
  for (int k = 0; k < 10000; ++k) {
    const double t_prev = s.time;
    s = rk4_step(s, zero, 1e-3, p, env);
    const double phi = s.balloon_payload.swing.x();
    if ((prev_phi < 0.0 && phi >= 0.0) || (prev_phi > 0.0 && phi <= 0.0)) {
      crossings.push_back(t_prev + 1e-3 * prev_phi / (prev_phi - phi));
    }
    prev_phi = phi;
  }
  REQUIRE(crossings.size() >= 5);
  const double half_period =
      (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
  const double freq = 1.0 / (2.0 * half_period);
  const double expected = std::sqrt(env.gravity / p.payload.tether_length) / (2.0 * kPi);
  CHECK(std::abs(freq - expected) / expected < 0.01);
}

TEST_CASE("accepted tension solutions are never negative") {
  const SystemParams p = default_params();
  const Environment env;
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    SystemState s = symmetric_taut_state(p, 0.2 + 0.2 * (unif(rng) + 1.0));
    s.balloon_payload.swing = Vec2{0.15 * unif(rng), 0.15 * unif(rng)};
    s.balloon_payload.swing_rate = Vec2{0.3 * unif(rng), 0.3 * unif(rng)};
    std::vector<UgvInput> inputs(3);
    for (auto& u : inputs) {
      u.ax = 0.1 * unif(rng);
      u.ay = 0.1 * unif(rng);
    }
    const TensionSolution sol =
        solve_constrained_dynamics(s.balloon_payload, s.ugvs, inputs, p, env);
    CHECK(sol.payload_tension >= 0.0);
    for (int i = 0; i < 3; ++i) {
      CHECK(sol.ugv_tensions(i) >= 0.0);
      if (sol.slack[i]) CHECK(sol.ugv_tensions(i) == 0.0);
      if (sol.ugv_tensions(i) > 0.0) CHECK(sol.slack[i] == false);
    }
  }
}

TEST_CASE("overstretched tethers are rejected") {
  const SystemParams p = default_params();
  const Environment env;
  SystemState s = symmetric_taut_state(p, 0.3);
  s.ugvs[0].x += 0.3 * p.tether.ugv_tether_length;  // way past the 5% band
  const std::vector<UgvInput> zero(3);
  CHECK_THROWS_AS(solve_constrained_dynamics(s.balloon_payload, s.ugvs, zero, p, env),
                  SingularConfiguration);
}
