#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "tethersim/config.hpp"
#include "tethersim/csv.hpp"

using namespace tethersim;

namespace {

std::string scenario_path(const std::string& name) {
  return std::string(TETHERSIM_SCENARIO_DIR) + "/" + name;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TETHERSIM_CLI_PATH) + " " + args + " > cli_stdout.txt 2>&1";
  const int ret = std::system(cmd.c_str());
  return WEXITSTATUS(ret);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("simulate on the equilibrium scenario exits 0 and holds position") {
  ScenarioConfig c = load_config(scenario_path("equilibrium.json"));
  c.duration = 5.0;
  save_config(c, "cli_eq.json");
  REQUIRE(run_cli("simulate --config cli_eq.json --out cli_eq.csv") == 0);
  const auto records = read_telemetry_csv("cli_eq.csv", 3);
  REQUIRE(records.size() > 100);
  const Vec3 start = records.front().payload_position;
  for (const auto& r : records) CHECK((r.payload_position - start).norm() < 1e-4);
}

TEST_CASE("identical config and seed give byte-identical telemetry") {
  ScenarioConfig c = load_config(scenario_path("scenario_fig4.json"));
  c.duration = 6.0;
  save_config(c, "cli_det.json");
  REQUIRE(run_cli("simulate --config cli_det.json --seed 7 --out cli_det_a.csv") == 0);
  REQUIRE(run_cli("simulate --config cli_det.json --seed 7 --out cli_det_b.csv") == 0);
  const std::string a = slurp("cli_det_a.csv");
  CHECK(!a.empty());
  CHECK(a == slurp("cli_det_b.csv"));
}

TEST_CASE("replay of case1 moves the payload in +x") {
  REQUIRE(run_cli("replay --config " + scenario_path("replay_case.json") + " --profile " +
                  scenario_path("case1.csv") + " --out cli_case1.csv") == 0);
  const auto records = read_telemetry_csv("cli_case1.csv", 3);
  REQUIRE(!records.empty());
  const double dx = records.back().payload_position.x() - records.front().payload_position.x();
  CHECK(dx > 0.3);
}

TEST_CASE("replay rejects gapped profiles with exit 3") {
  {
    std::ofstream f("cli_gap.csv");
    f << "t,u1_1,u1_2,u1_3,u2_1,u2_2,u2_3,u3_1,u3_2,u3_3\n";
    f << "0,0,0,0,0,0,0,0,0,0\n";
    f << "0.05,0,0,0,0,0,0,0,0,0\n";
    f << "0.5,0,0,0,0,0,0,0,0,0\n";
  }
  CHECK(run_cli("replay --config " + scenario_path("replay_case.json") +
                " --profile cli_gap.csv --out cli_gap_out.csv") == 3);
}

TEST_CASE("config errors exit 1") {
  {
    std::ofstream f("cli_bad.json");
    f << "{ \"tether\": { \"l_R\": -1 } }";
  }
  CHECK(run_cli("simulate --config cli_bad.json") == 1);
  CHECK(run_cli("simulate --config does_not_exist.json") == 1);
}

TEST_CASE("unwritable telemetry path exits 4") {
  CHECK(run_cli("simulate --config cli_eq.json --out /nonexistent_dir_tethersim/out.csv") == 4);
}

TEST_CASE("validate --fast passes on a fresh build") {
  CHECK(run_cli("validate --fast") == 0);
  const std::string out = slurp("cli_stdout.txt");
  CHECK(out.find("energy_conservation") != std::string::npos);
  CHECK(out.find("PASS") != std::string::npos);
}

TEST_CASE("controller trace CSV is emitted when configured") {
  ScenarioConfig c = load_config(scenario_path("scenario_fig4.json"));
  c.duration = 4.0;
  c.outputs.controller_trace = "cli_trace.csv";
  save_config(c, "cli_trace.json");
  REQUIRE(run_cli("simulate --config cli_trace.json --out cli_trace_tel.csv") == 0);
  std::ifstream f("cli_trace.csv");
  REQUIRE(f.good());
  std::string header;
  std::getline(f, header);
  CHECK(header.find("status") != std::string::npos);
  CHECK(header.find("cost") != std::string::npos);
  CHECK(header.find("uv_1") != std::string::npos);
  int rows = 0;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 4);  // one per control step
}

TEST_CASE("wheel reference CSV is emitted when configured") {
  ScenarioConfig c = load_config(scenario_path("equilibrium.json"));
  c.duration = 3.0;
  c.outputs.wheel_references = "cli_wheels.csv";
  save_config(c, "cli_wheels.json");
  REQUIRE(run_cli("simulate --config cli_wheels.json --out cli_wheels_tel.csv") == 0);
  std::ifstream f("cli_wheels.csv");
  REQUIRE(f.good());
  std::string header;
  std::getline(f, header);
  CHECK(header.find("w1_fl") != std::string::npos);
  int rows = 0;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty()) ++rows;
  }
  // 20 Hz samples inside each 1 s control interval.
  CHECK(rows >= 40);
}
