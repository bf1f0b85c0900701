// Command-line front end: closed-loop simulation, open-loop replay of
// recorded acceleration profiles, and the validation suite.

#include <cstdio>
#include <exception>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "tethersim/config.hpp"
#include "tethersim/csv.hpp"
#include "tethersim/log.hpp"
#include "tethersim/mpc.hpp"
#include "tethersim/simulation.hpp"
#include "tethersim/validation.hpp"

namespace {

using namespace tethersim;

int cmd_simulate(const std::string& config_path, const std::string& out_path, long seed,
                 double duration) {
  ScenarioConfig config;
  try {
    config = load_config(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  }
  if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
  if (duration > 0.0) config.duration = duration;
  if (!out_path.empty()) config.outputs.telemetry = out_path;
  if (config.outputs.telemetry.empty()) config.outputs.telemetry = "telemetry.csv";

  std::unique_ptr<LtvMpcController> controller;
  if (config.controller_enabled) {
    controller = std::make_unique<LtvMpcController>(config.mpc, config.params,
                                                    config.environment, config.references);
  }

  std::vector<TelemetryRecord> records;
  try {
    records = run_scenario(config, controller.get());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "simulation error: %s\n", e.what());
    return 3;
  }

  try {
    write_telemetry_csv(records, config.outputs.telemetry);
    if (controller && !config.outputs.controller_trace.empty()) {
      write_controller_trace_csv(controller->trace(), config.params.tether.count,
                                 config.outputs.controller_trace);
    }
    if (!config.outputs.wheel_references.empty()) {
      write_wheel_reference_csv(records, config.mpc.sample_time, config.ugv_geometry, 20.0,
                                config.outputs.wheel_references);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  }

  log_message(LogLevel::kInfo,
              "simulate: " + std::to_string(records.size()) + " telemetry records -> " +
                  config.outputs.telemetry);
  if (controller && controller->failsafe_count() > 0) {
    std::fprintf(stderr, "solver fail-safe engaged %d time(s)\n", controller->failsafe_count());
    return 2;
  }
  return 0;
}

int cmd_replay(const std::string& config_path, const std::string& profile_path,
               const std::string& out_path) {
  ScenarioConfig config;
  try {
    config = load_config(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  }
  if (!out_path.empty()) config.outputs.telemetry = out_path;
  if (config.outputs.telemetry.empty()) config.outputs.telemetry = "replay.csv";

  std::vector<TelemetryRecord> records;
  try {
    const AccelProfile profile = load_accel_profile(profile_path, config.params.tether.count);
    records = replay_inputs(config, profile);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "profile error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "replay error: %s\n", e.what());
    return 3;
  }

  try {
    write_telemetry_csv(records, config.outputs.telemetry);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  }
  log_message(LogLevel::kInfo,
              "replay: " + std::to_string(records.size()) + " telemetry records -> " +
                  config.outputs.telemetry);
  return 0;
}

int cmd_validate(bool fast) {
  const std::vector<CheckResult> results = run_validation_suite(fast);
  bool all_passed = true;
  std::printf("%-28s %-6s %s\n", "check", "result", "detail");
  for (const CheckResult& r : results) {
    std::printf("%-28s %-6s %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.detail.c_str());
    all_passed = all_passed && r.passed;
  }
  return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tethered-balloon simulator and LTV-MPC payload controller"};
  app.require_subcommand(1);

  std::string config_path, out_path, profile_path;
  long seed = -1;
  double duration = -1.0;
  bool fast = false;

  CLI::App* sim = app.add_subcommand("simulate", "closed-loop scenario run");
  sim->add_option("--config", config_path, "scenario JSON")->required();
  sim->add_option("--out", out_path, "telemetry CSV path");
  sim->add_option("--seed", seed, "override config seed");
  sim->add_option("--duration", duration, "override run duration [s]");

  CLI::App* rep = app.add_subcommand("replay", "open-loop acceleration replay");
  rep->add_option("--config", config_path, "scenario JSON")->required();
  rep->add_option("--profile", profile_path, "acceleration profile CSV")->required();
  rep->add_option("--out", out_path, "telemetry CSV path");

  CLI::App* val = app.add_subcommand("validate", "run the physics/solver checks");
  val->add_flag("--fast", fast, "abbreviated suite (< 60 s)");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) return cmd_simulate(config_path, out_path, seed, duration);
  if (rep->parsed()) return cmd_replay(config_path, profile_path, out_path);
  if (val->parsed()) return cmd_validate(fast);
  return 1;
}
