#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tethersim/mpc.hpp"
#include "tethersim/simulation.hpp"

namespace tethersim {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InitialCondition {
  Vec3 payload_position{0.0, 0.0, 0.0};
  /// Rovers are auto-placed on the taut circle at these azimuths unless
  /// explicit positions are given.
  std::vector<double> rover_azimuths_deg;
  std::optional<std::vector<Vec2>> rover_positions;
  std::vector<double> rover_headings_deg;
};

struct OutputPaths {
  std::string telemetry;
  std::string controller_trace;
  std::string wheel_references;
};

/// Full description of one run: physical parameters, initial conditions,
/// controller settings, reference schedule and output wiring.
struct ScenarioConfig {
  SystemParams params;
  UgvGeometry ugv_geometry;
  Environment environment;
  MpcConfig mpc;
  ReferenceSchedule references;
  std::vector<GustSpec> gusts;
  InitialCondition initial;
  double duration{40.0};
  double physics_dt{1e-3};
  double telemetry_rate{50.0};
  bool controller_enabled{true};
  std::uint64_t seed{0};
  double replay_slip_noise{0.0};
  OutputPaths outputs;

  /// Paper-geometry defaults: 2.2 m helium balloon, 1 kg payload, three
  /// rovers with attachments 30 degrees below the equator.
  static ScenarioConfig defaults();
};

/// Parses, fills defaults and validates. Throws ParseError for malformed
/// JSON (with line/column) and ValidationError naming the offending field.
ScenarioConfig load_config(const std::string& path);

ScenarioConfig config_from_json_text(const std::string& text);

std::string config_to_json_text(const ScenarioConfig& config);

void save_config(const ScenarioConfig& config, const std::string& path);

}  // namespace tethersim
