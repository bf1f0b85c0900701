#include "tethersim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace tethersim {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ValidationError("unknown key '" + (path.empty() ? it.key() : path + "." + it.key()) +
                            "'");
    }
  }
}

double get_num(const json& j, const std::string& key, double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ValidationError(path + "." + key + " must be a number");
  return j[key].get<double>();
}

bool get_bool(const json& j, const std::string& key, bool fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ValidationError(path + "." + key + " must be a boolean");
  return j[key].get<bool>();
}

Vec3 get_vec3(const json& j, const std::string& key, const Vec3& fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_array() || v.size() != 3) {
    throw ValidationError(path + "." + key + " must be an array of 3 numbers");
  }
  return Vec3{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

std::vector<double> get_array(const json& j, const std::string& key,
                              const std::vector<double>& fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_array()) throw ValidationError(path + "." + key + " must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ValidationError(path + "." + key + " must contain numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void require_positive(double v, const std::string& field) {
  if (!(v > 0.0)) {
    throw ValidationError(field + " must be positive (got " + std::to_string(v) + ")");
  }
}

void require_nonnegative(double v, const std::string& field) {
  if (!(v >= 0.0)) {
    throw ValidationError(field + " must be nonnegative (got " + std::to_string(v) + ")");
  }
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

ScenarioConfig ScenarioConfig::defaults() {
  ScenarioConfig c;
  c.params.balloon = spherical_balloon(2.2, 3.6, 0.1786, -30.0 * kPi / 180.0,
                                       {0.0, 120.0 * kPi / 180.0, 240.0 * kPi / 180.0});
  c.params.payload = PayloadParams{};
  c.params.tether = TetherParams{};
  c.params.constraint = ConstraintSettings{};
  c.ugv_geometry = UgvGeometry{};
  c.environment = Environment{};
  c.mpc = MpcConfig::defaults_for(c.params.tether.count);
  return c;
}

ScenarioConfig config_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!root.is_object()) throw ValidationError("config root must be a JSON object");

  check_keys(root,
             {"balloon", "payload", "tether", "environment", "ugv", "mpc", "references", "gusts",
              "initial", "duration", "physics_dt", "telemetry_rate", "controller_enabled", "seed",
              "replay_slip_noise", "outputs"},
             "");

  ScenarioConfig c = ScenarioConfig::defaults();

  // Tether block first: the rover count shapes the balloon attachments and
  // the controller vectors.
  int n = c.params.tether.count;
  if (root.contains("tether")) {
    const json& t = root["tether"];
    check_keys(t, {"l_R", "n", "baumgarte_alpha", "baumgarte_beta", "engage_band"}, "tether");
    c.params.tether.ugv_tether_length = get_num(t, "l_R", c.params.tether.ugv_tether_length, "tether");
    if (t.contains("n")) {
      if (!t["n"].is_number_integer()) throw ValidationError("tether.n must be an integer");
      n = t["n"].get<int>();
    }
    c.params.constraint.baumgarte_alpha =
        get_num(t, "baumgarte_alpha", c.params.constraint.baumgarte_alpha, "tether");
    c.params.constraint.baumgarte_beta =
        get_num(t, "baumgarte_beta", c.params.constraint.baumgarte_beta, "tether");
    c.params.constraint.engage_band = get_num(t, "engage_band", c.params.constraint.engage_band, "tether");
    require_positive(c.params.tether.ugv_tether_length, "tether.l_R");
    if (n < 1) throw ValidationError("tether.n must be >= 1");
    require_nonnegative(c.params.constraint.baumgarte_alpha, "tether.baumgarte_alpha");
    require_nonnegative(c.params.constraint.baumgarte_beta, "tether.baumgarte_beta");
    if (!(c.params.constraint.engage_band >= 0.0 && c.params.constraint.engage_band < 0.05)) {
      throw ValidationError("tether.engage_band must lie in [0, 0.05)");
    }
  }
  c.params.tether.count = n;

  {
    const json b = root.contains("balloon") ? root["balloon"] : json::object();
    check_keys(b,
               {"diameter", "m_B", "rho_g", "C_D", "C_a", "V_B", "A_B", "inertia_diag", "r_BP_b",
                "attach_elevation_deg", "attach_azimuths_deg", "ugv_attach_b"},
               "balloon");
    const double diameter = get_num(b, "diameter", 2.2, "balloon");
    require_positive(diameter, "balloon.diameter");
    const double m_b = get_num(b, "m_B", 3.6, "balloon");
    const double rho_g = get_num(b, "rho_g", 0.1786, "balloon");
    const double elev = get_num(b, "attach_elevation_deg", -30.0, "balloon") * kPi / 180.0;
    std::vector<double> az_deg = get_array(b, "attach_azimuths_deg", {}, "balloon");
    if (az_deg.empty()) {
      for (int i = 0; i < n; ++i) az_deg.push_back(360.0 * i / n);
    }
    if (static_cast<int>(az_deg.size()) != n) {
      throw ValidationError("balloon.attach_azimuths_deg must have tether.n entries");
    }
    std::vector<double> az_rad;
    for (double a : az_deg) az_rad.push_back(a * kPi / 180.0);
    c.params.balloon = spherical_balloon(diameter, m_b, rho_g, elev, az_rad);
    c.params.balloon.drag_coeff = get_num(b, "C_D", 0.47, "balloon");
    c.params.balloon.added_mass_coeff = get_num(b, "C_a", 0.5, "balloon");
    if (b.contains("V_B")) c.params.balloon.volume = get_num(b, "V_B", 0.0, "balloon");
    if (b.contains("A_B")) c.params.balloon.reference_area = get_num(b, "A_B", 0.0, "balloon");
    if (b.contains("inertia_diag")) {
      const auto d = get_array(b, "inertia_diag", {}, "balloon");
      if (d.size() != 3) throw ValidationError("balloon.inertia_diag must have 3 entries");
      c.params.balloon.inertia_body = Vec3{d[0], d[1], d[2]}.asDiagonal();
      for (double v : d) require_positive(v, "balloon.inertia_diag");
    }
    c.params.balloon.payload_attach =
        get_vec3(b, "r_BP_b", c.params.balloon.payload_attach, "balloon");
    if (b.contains("ugv_attach_b")) {
      const json& ja = b["ugv_attach_b"];
      if (!ja.is_array() || static_cast<int>(ja.size()) != n) {
        throw ValidationError("balloon.ugv_attach_b must list tether.n attachment points");
      }
      c.params.balloon.ugv_attach.clear();
      for (const auto& e : ja) {
        if (!e.is_array() || e.size() != 3) {
          throw ValidationError("balloon.ugv_attach_b entries must be arrays of 3 numbers");
        }
        c.params.balloon.ugv_attach.push_back(
            Vec3{e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
      }
    }
    require_positive(c.params.balloon.structural_mass, "balloon.m_B");
    require_positive(c.params.balloon.volume, "balloon.V_B");
    require_nonnegative(c.params.balloon.gas_density, "balloon.rho_g");
    require_nonnegative(c.params.balloon.drag_coeff, "balloon.C_D");
    require_positive(c.params.balloon.reference_area, "balloon.A_B");
    require_nonnegative(c.params.balloon.added_mass_coeff, "balloon.C_a");
  }

  if (root.contains("payload")) {
    const json& p = root["payload"];
    check_keys(p, {"m_P", "l_P", "C_D_A"}, "payload");
    c.params.payload.mass = get_num(p, "m_P", c.params.payload.mass, "payload");
    c.params.payload.tether_length = get_num(p, "l_P", c.params.payload.tether_length, "payload");
    c.params.payload.drag_area = get_num(p, "C_D_A", c.params.payload.drag_area, "payload");
  }
  require_positive(c.params.payload.mass, "payload.m_P");
  require_positive(c.params.payload.tether_length, "payload.l_P");
  require_nonnegative(c.params.payload.drag_area, "payload.C_D_A");

  if (root.contains("environment")) {
    const json& e = root["environment"];
    check_keys(e, {"rho_a", "g", "wind"}, "environment");
    c.environment.air_density = get_num(e, "rho_a", c.environment.air_density, "environment");
    c.environment.gravity = get_num(e, "g", c.environment.gravity, "environment");
    c.environment.wind = get_vec3(e, "wind", c.environment.wind, "environment");
  }
  require_positive(c.environment.air_density, "environment.rho_a");
  require_positive(c.environment.gravity, "environment.g");
  if (c.params.balloon.gas_density >= c.environment.air_density) {
    throw ValidationError("balloon.rho_g must be below environment.rho_a");
  }

  if (root.contains("ugv")) {
    const json& u = root["ugv"];
    check_keys(u, {"r_w", "l_x", "l_y"}, "ugv");
    c.ugv_geometry.wheel_radius = get_num(u, "r_w", c.ugv_geometry.wheel_radius, "ugv");
    c.ugv_geometry.half_length = get_num(u, "l_x", c.ugv_geometry.half_length, "ugv");
    c.ugv_geometry.half_width = get_num(u, "l_y", c.ugv_geometry.half_width, "ugv");
  }
  require_positive(c.ugv_geometry.wheel_radius, "ugv.r_w");
  require_positive(c.ugv_geometry.half_length, "ugv.l_x");
  require_positive(c.ugv_geometry.half_width, "ugv.l_y");

  c.mpc = MpcConfig::defaults_for(n);
  if (root.contains("mpc")) {
    const json& m = root["mpc"];
    check_keys(m,
               {"T_s", "N_p", "w_y", "w_du", "c_y", "c_u", "a_u", "rover_position_bound",
                "rover_speed_bound", "a_y", "relinearize_along_horizon", "qp_max_iterations",
                "qp_tolerance", "hessian_regularization"},
               "mpc");
    c.mpc.sample_time = get_num(m, "T_s", c.mpc.sample_time, "mpc");
    if (m.contains("N_p")) {
      if (!m["N_p"].is_number_integer()) throw ValidationError("mpc.N_p must be an integer");
      c.mpc.horizon = m["N_p"].get<int>();
    }
    auto fill5 = [&](const std::string& key, Eigen::Matrix<double, 5, 1>& out) {
      if (!m.contains(key)) return;
      const auto v = get_array(m, key, {}, "mpc");
      if (v.size() != 5) throw ValidationError("mpc." + key + " must have 5 entries");
      for (int i = 0; i < 5; ++i) out(i) = v[i];
    };
    fill5("w_y", c.mpc.output_weights);
    fill5("c_y", c.mpc.output_scales);
    fill5("a_y", c.mpc.output_bounds);
    auto filln = [&](const std::string& key, Eigen::VectorXd& out) {
      if (!m.contains(key)) return;
      const auto v = get_array(m, key, {}, "mpc");
      if (static_cast<int>(v.size()) != 4 * n) {
        throw ValidationError("mpc." + key + " must have 4*n entries");
      }
      out = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    };
    filln("w_du", c.mpc.input_variation_weights);
    filln("c_u", c.mpc.input_scales);
    c.mpc.accel_bound = get_num(m, "a_u", c.mpc.accel_bound, "mpc");
    c.mpc.rover_position_bound =
        get_num(m, "rover_position_bound", c.mpc.rover_position_bound, "mpc");
    c.mpc.rover_speed_bound = get_num(m, "rover_speed_bound", c.mpc.rover_speed_bound, "mpc");
    c.mpc.relinearize_along_horizon =
        get_bool(m, "relinearize_along_horizon", c.mpc.relinearize_along_horizon, "mpc");
    if (m.contains("qp_max_iterations")) {
      if (!m["qp_max_iterations"].is_number_integer()) {
        throw ValidationError("mpc.qp_max_iterations must be an integer");
      }
      c.mpc.qp_max_iterations = m["qp_max_iterations"].get<int>();
    }
    c.mpc.qp_tolerance = get_num(m, "qp_tolerance", c.mpc.qp_tolerance, "mpc");
    c.mpc.hessian_regularization =
        get_num(m, "hessian_regularization", c.mpc.hessian_regularization, "mpc");
  }
  require_positive(c.mpc.sample_time, "mpc.T_s");
  if (c.mpc.horizon < 1) throw ValidationError("mpc.N_p must be >= 1");
  if ((c.mpc.output_weights.array() < 0.0).any()) {
    throw ValidationError("mpc.w_y entries must be nonnegative");
  }
  if ((c.mpc.input_variation_weights.array() < 0.0).any()) {
    throw ValidationError("mpc.w_du entries must be nonnegative");
  }
  if ((c.mpc.output_scales.array() <= 0.0).any()) {
    throw ValidationError("mpc.c_y entries must be positive");
  }
  if ((c.mpc.input_scales.array() <= 0.0).any()) {
    throw ValidationError("mpc.c_u entries must be positive");
  }
  require_positive(c.mpc.accel_bound, "mpc.a_u");
  require_positive(c.mpc.rover_position_bound, "mpc.rover_position_bound");
  require_positive(c.mpc.rover_speed_bound, "mpc.rover_speed_bound");
  if ((c.mpc.output_bounds.array() <= 0.0).any()) {
    throw ValidationError("mpc.a_y entries must be positive");
  }
  if (c.mpc.qp_max_iterations < 1) throw ValidationError("mpc.qp_max_iterations must be >= 1");
  require_positive(c.mpc.qp_tolerance, "mpc.qp_tolerance");
  require_nonnegative(c.mpc.hessian_regularization, "mpc.hessian_regularization");

  if (root.contains("references")) {
    const json& refs = root["references"];
    if (!refs.is_array()) throw ValidationError("references must be an array");
    c.references.clear();
    double last_time = -1e300;
    for (size_t i = 0; i < refs.size(); ++i) {
      const json& w = refs[i];
      const std::string path = "references[" + std::to_string(i) + "]";
      check_keys(w, {"time", "r_P_ref"}, path);
      ReferenceWaypoint wp;
      wp.time = get_num(w, "time", 0.0, path);
      wp.payload_position = get_vec3(w, "r_P_ref", Vec3::Zero(), path);
      if (wp.time <= last_time) {
        throw ValidationError(path + ".time must be strictly increasing");
      }
      last_time = wp.time;
      c.references.push_back(wp);
    }
  }

  if (root.contains("gusts")) {
    const json& gusts = root["gusts"];
    if (!gusts.is_array()) throw ValidationError("gusts must be an array");
    for (size_t i = 0; i < gusts.size(); ++i) {
      const json& g = gusts[i];
      const std::string path = "gusts[" + std::to_string(i) + "]";
      check_keys(g, {"start", "duration", "velocity"}, path);
      GustSpec spec;
      spec.start = get_num(g, "start", 0.0, path);
      spec.duration = get_num(g, "duration", 0.0, path);
      spec.velocity = get_vec3(g, "velocity", Vec3::Zero(), path);
      require_positive(spec.duration, path + ".duration");
      c.gusts.push_back(spec);
    }
  }

  if (root.contains("initial")) {
    const json& init = root["initial"];
    check_keys(init, {"r_P0", "rover_azimuths_deg", "rover_positions", "rover_headings_deg"},
               "initial");
    c.initial.payload_position = get_vec3(init, "r_P0", c.initial.payload_position, "initial");
    c.initial.rover_azimuths_deg = get_array(init, "rover_azimuths_deg", {}, "initial");
    c.initial.rover_headings_deg = get_array(init, "rover_headings_deg", {}, "initial");
    if (init.contains("rover_positions")) {
      const json& rp = init["rover_positions"];
      if (!rp.is_array() || static_cast<int>(rp.size()) != n) {
        throw ValidationError("initial.rover_positions must list tether.n [x, y] pairs");
      }
      std::vector<Vec2> pos;
      for (const auto& e : rp) {
        if (!e.is_array() || e.size() != 2) {
          throw ValidationError("initial.rover_positions entries must be [x, y]");
        }
        pos.emplace_back(e[0].get<double>(), e[1].get<double>());
      }
      c.initial.rover_positions = pos;
    }
    if (!c.initial.rover_azimuths_deg.empty() &&
        static_cast<int>(c.initial.rover_azimuths_deg.size()) != n) {
      throw ValidationError("initial.rover_azimuths_deg must have tether.n entries");
    }
  }

  c.duration = get_num(root, "duration", c.duration, "");
  c.physics_dt = get_num(root, "physics_dt", c.physics_dt, "");
  c.telemetry_rate = get_num(root, "telemetry_rate", c.telemetry_rate, "");
  c.controller_enabled = get_bool(root, "controller_enabled", c.controller_enabled, "");
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned() && !root["seed"].is_number_integer()) {
      throw ValidationError("seed must be an integer");
    }
    c.seed = root["seed"].get<std::uint64_t>();
  }
  c.replay_slip_noise = get_num(root, "replay_slip_noise", c.replay_slip_noise, "");
  require_nonnegative(c.replay_slip_noise, "replay_slip_noise");

  if (root.contains("outputs")) {
    const json& o = root["outputs"];
    check_keys(o, {"telemetry", "controller_trace", "wheel_references"}, "outputs");
    if (o.contains("telemetry")) c.outputs.telemetry = o["telemetry"].get<std::string>();
    if (o.contains("controller_trace")) {
      c.outputs.controller_trace = o["controller_trace"].get<std::string>();
    }
    if (o.contains("wheel_references")) {
      c.outputs.wheel_references = o["wheel_references"].get<std::string>();
    }
  }

  require_positive(c.duration, "duration");
  if (!(c.physics_dt > 0.0 && c.physics_dt <= 0.01)) {
    throw ValidationError("physics_dt must lie in (0, 0.01]");
  }
  require_positive(c.telemetry_rate, "telemetry_rate");
  const double ctrl_steps = c.mpc.sample_time / c.physics_dt;
  if (std::abs(ctrl_steps - std::round(ctrl_steps)) > 1e-6) {
    throw ValidationError("mpc.T_s must be an integer multiple of physics_dt");
  }
  const double telem_steps = 1.0 / (c.telemetry_rate * c.physics_dt);
  if (std::abs(telem_steps - std::round(telem_steps)) > 1e-6) {
    throw ValidationError("telemetry_rate period must be an integer multiple of physics_dt");
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const ScenarioConfig& c) {
  json root;
  const int n = c.params.tether.count;

  json balloon;
  balloon["m_B"] = c.params.balloon.structural_mass;
  balloon["rho_g"] = c.params.balloon.gas_density;
  balloon["C_D"] = c.params.balloon.drag_coeff;
  balloon["C_a"] = c.params.balloon.added_mass_coeff;
  balloon["V_B"] = c.params.balloon.volume;
  balloon["A_B"] = c.params.balloon.reference_area;
  balloon["inertia_diag"] = json::array({c.params.balloon.inertia_body(0, 0),
                                         c.params.balloon.inertia_body(1, 1),
                                         c.params.balloon.inertia_body(2, 2)});
  balloon["r_BP_b"] = vec3_to_json(c.params.balloon.payload_attach);
  json attach = json::array();
  for (const Vec3& a : c.params.balloon.ugv_attach) attach.push_back(vec3_to_json(a));
  balloon["ugv_attach_b"] = attach;
  root["balloon"] = balloon;

  root["payload"] = {{"m_P", c.params.payload.mass},
                     {"l_P", c.params.payload.tether_length},
                     {"C_D_A", c.params.payload.drag_area}};
  root["tether"] = {{"l_R", c.params.tether.ugv_tether_length},
                    {"n", c.params.tether.count},
                    {"baumgarte_alpha", c.params.constraint.baumgarte_alpha},
                    {"baumgarte_beta", c.params.constraint.baumgarte_beta},
                    {"engage_band", c.params.constraint.engage_band}};
  root["environment"] = {{"rho_a", c.environment.air_density},
                         {"g", c.environment.gravity},
                         {"wind", vec3_to_json(c.environment.wind)}};
  root["ugv"] = {{"r_w", c.ugv_geometry.wheel_radius},
                 {"l_x", c.ugv_geometry.half_length},
                 {"l_y", c.ugv_geometry.half_width}};

  json mpc;
  mpc["T_s"] = c.mpc.sample_time;
  mpc["N_p"] = c.mpc.horizon;
  mpc["w_y"] = std::vector<double>(c.mpc.output_weights.data(), c.mpc.output_weights.data() + 5);
  mpc["c_y"] = std::vector<double>(c.mpc.output_scales.data(), c.mpc.output_scales.data() + 5);
  mpc["a_y"] = std::vector<double>(c.mpc.output_bounds.data(), c.mpc.output_bounds.data() + 5);
  mpc["w_du"] = std::vector<double>(c.mpc.input_variation_weights.data(),
                                    c.mpc.input_variation_weights.data() + 4 * n);
  mpc["c_u"] =
      std::vector<double>(c.mpc.input_scales.data(), c.mpc.input_scales.data() + 4 * n);
  mpc["a_u"] = c.mpc.accel_bound;
  mpc["rover_position_bound"] = c.mpc.rover_position_bound;
  mpc["rover_speed_bound"] = c.mpc.rover_speed_bound;
  mpc["relinearize_along_horizon"] = c.mpc.relinearize_along_horizon;
  mpc["qp_max_iterations"] = c.mpc.qp_max_iterations;
  mpc["qp_tolerance"] = c.mpc.qp_tolerance;
  mpc["hessian_regularization"] = c.mpc.hessian_regularization;
  root["mpc"] = mpc;

  json refs = json::array();
  for (const ReferenceWaypoint& w : c.references) {
    refs.push_back({{"time", w.time}, {"r_P_ref", vec3_to_json(w.payload_position)}});
  }
  root["references"] = refs;

  json gusts = json::array();
  for (const GustSpec& g : c.gusts) {
    gusts.push_back(
        {{"start", g.start}, {"duration", g.duration}, {"velocity", vec3_to_json(g.velocity)}});
  }
  root["gusts"] = gusts;

  json initial;
  initial["r_P0"] = vec3_to_json(c.initial.payload_position);
  if (!c.initial.rover_azimuths_deg.empty()) {
    initial["rover_azimuths_deg"] = c.initial.rover_azimuths_deg;
  }
  if (!c.initial.rover_headings_deg.empty()) {
    initial["rover_headings_deg"] = c.initial.rover_headings_deg;
  }
  if (c.initial.rover_positions.has_value()) {
    json rp = json::array();
    for (const Vec2& p : *c.initial.rover_positions) rp.push_back(json::array({p.x(), p.y()}));
    initial["rover_positions"] = rp;
  }
  root["initial"] = initial;

  root["duration"] = c.duration;
  root["physics_dt"] = c.physics_dt;
  root["telemetry_rate"] = c.telemetry_rate;
  root["controller_enabled"] = c.controller_enabled;
  root["seed"] = c.seed;
  root["replay_slip_noise"] = c.replay_slip_noise;

  json outputs;
  if (!c.outputs.telemetry.empty()) outputs["telemetry"] = c.outputs.telemetry;
  if (!c.outputs.controller_trace.empty()) {
    outputs["controller_trace"] = c.outputs.controller_trace;
  }
  if (!c.outputs.wheel_references.empty()) {
    outputs["wheel_references"] = c.outputs.wheel_references;
  }
  root["outputs"] = outputs;

  return root.dump(2) + "\n";
}

void save_config(const ScenarioConfig& config, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << config_to_json_text(config);
}

}  // namespace tethersim
