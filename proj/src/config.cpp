#include "tripod/config.hpp"

#include <fstream>

namespace tripod::config {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigInvalid(where + ": " + what);
}

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
}

double get_number(const Json& j, const std::string& where, const char* key, double fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) fail(where + "." + key, "expected a number");
  return it->get<double>();
}

bool get_bool(const Json& j, const std::string& where, const char* key, bool fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) fail(where + "." + key, "expected true or false");
  return it->get<bool>();
}

std::array<double, kLimbs> get_triple(const Json& j, const std::string& where, const char* key,
                                      const std::array<double, kLimbs>& fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_array() || it->size() != kLimbs) fail(where + "." + key, "expected 3 numbers");
  std::array<double, kLimbs> out{};
  for (int i = 0; i < kLimbs; ++i) {
    if (!(*it)[i].is_number()) fail(where + "." + key, "expected 3 numbers");
    out[i] = (*it)[i].get<double>();
  }
  return out;
}

template <typename F>
auto checked(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const InvalidParams& e) {
    fail(where, e.what());
  }
}

}  // namespace

Json to_json(const RobotParams& p) {
  return {{"body_mass", p.body_mass},       {"rot_inertia", p.rot_inertia},
          {"hinge_radius", p.hinge_radius}, {"limb_length", p.limb_length},
          {"friction_mu", p.friction_mu},   {"gravity", p.gravity},
          {"creep_velocity", p.creep_velocity}};
}

Json to_json(const GaitParams& g) {
  return {{"amplitudes", g.amplitudes_deg}, {"phases", g.phases_deg}, {"frequency", g.frequency_hz}};
}

Json to_json(const WindField& w) {
  return {{"speed", w.speed},
          {"direction", w.direction_deg},
          {"air_density", w.air_density},
          {"drag_coeff", w.drag_coeff},
          {"frontal_area", w.frontal_area}};
}

Json to_json(const Path& p) {
  Json pts = Json::array();
  for (const auto& w : p.waypoints) pts.push_back({w.x, w.y});
  return {{"waypoints", pts}, {"capture_radius", p.capture_radius}, {"closed", p.closed}};
}

Json to_json(const PIController& c) {
  return {{"K_P", c.kp}, {"K_I", c.ki}, {"T_s", c.ts}, {"windup_limit", c.windup_limit},
          {"correction_limit", c.correction_limit}};
}

Json to_json(const GaitMap& m) {
  Json mu_list = Json::array();
  Json series = Json::array();
  for (const auto& s : m.per_mu) {
    mu_list.push_back(s.mu);
    Json samples = Json::array();
    for (const auto& x : s.samples) {
      samples.push_back({{"alpha", x.alpha_deg}, {"theta_avg", x.theta_avg_deg}, {"theta_std", x.theta_std_deg}});
    }
    series.push_back({{"mu", s.mu}, {"samples", samples}});
  }
  Json nodes = Json::array();
  for (const auto& n : m.nodes) nodes.push_back({{"theta", n.theta_deg}, {"alpha", n.alpha_deg}});
  return {{"version", GaitMap::kVersion}, {"mu_list", mu_list}, {"cycles", m.cycles},
          {"series", series},             {"nodes", nodes},     {"reversed_zones", m.reversed}};
}

Json to_json(const Metrics& m) {
  Json segs = Json::array();
  for (const auto& s : m.per_segment) {
    segs.push_back({{"segment", s.segment},
                    {"samples", s.samples},
                    {"sum_abs_e", s.sum_abs_e},
                    {"max_abs_e", s.max_abs_e},
                    {"mean_abs_e", s.mean_abs_e()}});
  }
  Json j{{"delta", m.delta},
         {"max_abs_e", m.max_abs_e},
         {"cycles", m.cycles},
         {"completed", m.completed()},
         {"per_segment", segs}};
  j["T_c"] = m.completion_time ? Json(*m.completion_time) : Json(nullptr);
  return j;
}

Json to_json(const ScenarioConfig& c) {
  Json j{{"name", c.name}, {"robot", to_json(c.robot)}, {"duration", c.duration},
         {"max_cycles", c.max_cycles}, {"seed", c.seed}};
  if (const auto* g = std::get_if<GaitParams>(&c.gait)) j["gait"] = to_json(*g);
  if (const auto* k = std::get_if<CanonicalGait>(&c.gait)) j["canonical"] = to_string(*k);
  if (const auto* cl = std::get_if<ClosedLoopSource>(&c.gait)) {
    Json loop{{"path", to_json(cl->path)},
              {"controller", to_json(cl->controller)},
              {"heading_bias_deg", cl->heading_bias_deg}};
    if (!cl->map_file.empty()) loop["map_file"] = cl->map_file;
    j["closed_loop"] = loop;
  }
  if (c.wind) j["wind"] = to_json(*c.wind);
  if (c.initial_state) {
    j["initial_state"] = {{"x", c.initial_state->x}, {"y", c.initial_state->y},
                          {"xi", rad_to_deg(c.initial_state->xi)}};
  }
  if (!c.output_dir.empty()) j["output"] = {{"dir", c.output_dir}};
  j["integrator"] = {{"rel_tol", c.integrator.rel_tol},
                     {"abs_tol", c.integrator.abs_tol},
                     {"output_interval", c.integrator.output_interval}};
  return j;
}

RobotParams robot_params_from_json(const Json& j, const std::string& where) {
  require_object(j, where);
  RobotParams p;
  p.body_mass = get_number(j, where, "body_mass", p.body_mass);
  p.rot_inertia = get_number(j, where, "rot_inertia", p.rot_inertia);
  p.hinge_radius = get_number(j, where, "hinge_radius", p.hinge_radius);
  p.limb_length = get_number(j, where, "limb_length", p.limb_length);
  p.friction_mu = get_number(j, where, "friction_mu", p.friction_mu);
  p.gravity = get_number(j, where, "gravity", p.gravity);
  p.creep_velocity = get_number(j, where, "creep_velocity", p.creep_velocity);
  checked(where, [&] { return validate_params(p); });
  return p;
}

GaitParams gait_params_from_json(const Json& j, const std::string& where) {
  require_object(j, where);
  GaitParams g;
  g.amplitudes_deg = get_triple(j, where, "amplitudes", g.amplitudes_deg);
  g.phases_deg = get_triple(j, where, "phases", g.phases_deg);
  g.frequency_hz = get_number(j, where, "frequency", g.frequency_hz);
  checked(where, [&] { return validate_gait(g); });
  return g;
}

WindField wind_from_json(const Json& j, const std::string& where) {
  require_object(j, where);
  WindField w;
  w.speed = get_number(j, where, "speed", w.speed);
  w.direction_deg = get_number(j, where, "direction", w.direction_deg);
  w.air_density = get_number(j, where, "air_density", w.air_density);
  w.drag_coeff = get_number(j, where, "drag_coeff", w.drag_coeff);
  w.frontal_area = get_number(j, where, "frontal_area", w.frontal_area);
  checked(where, [&] { return validate_wind(w); });
  return w;
}

Path path_from_json(const Json& j, const std::string& where) {
  require_object(j, where);
  Path p;
  const auto it = j.find("waypoints");
  if (it == j.end() || !it->is_array()) fail(where + ".waypoints", "expected a list of [x, y] pairs");
  for (const auto& w : *it) {
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
      fail(where + ".waypoints", "expected a list of [x, y] pairs");
    }
    p.waypoints.push_back({w[0].get<double>(), w[1].get<double>()});
  }
  p.capture_radius = get_number(j, where, "capture_radius", p.capture_radius);
  p.closed = get_bool(j, where, "closed", p.closed);
  try {
    validate_path(p);
  } catch (const ConfigInvalid& e) {
    fail(where, e.what());
  }
  return p;
}

PIController controller_from_json(const Json& j, const std::string& where) {
  require_object(j, where);
  PIController c;
  c.kp = get_number(j, where, "K_P", c.kp);
  c.ki = get_number(j, where, "K_I", c.ki);
  c.ts = get_number(j, where, "T_s", c.ts);
  c.windup_limit = get_number(j, where, "windup_limit", c.windup_limit);
  c.correction_limit = get_number(j, where, "correction_limit", c.correction_limit);
  try {
    validate_controller(c);
  } catch (const ConfigInvalid& e) {
    fail(where, e.what());
  }
  return c;
}

GaitMap gait_map_from_json(const Json& j) {
  require_object(j, "gait_map");
  if (j.value("version", -1) != GaitMap::kVersion) {
    fail("gait_map.version", "unsupported version (expected " + std::to_string(GaitMap::kVersion) + ")");
  }
  GaitMap m;
  try {
    m.cycles = j.at("cycles").get<int>();
    for (const auto& s : j.at("series")) {
      GaitMap::Series series{s.at("mu").get<double>(), {}};
      for (const auto& x : s.at("samples")) {
        series.samples.push_back({x.at("alpha").get<double>(), x.at("theta_avg").get<double>(),
                                  x.value("theta_std", 0.0)});
      }
      m.per_mu.push_back(std::move(series));
    }
    for (const auto& n : j.at("nodes")) {
      m.nodes.push_back({n.at("theta").get<double>(), n.at("alpha").get<double>()});
    }
    if (j.contains("reversed_zones")) m.reversed = j.at("reversed_zones").get<std::array<bool, 6>>();
  } catch (const nlohmann::json::exception& e) {
    fail("gait_map", e.what());
  }
  if (m.nodes.size() < 2) fail("gait_map.nodes", "need at least two nodes");
  for (size_t i = 1; i < m.nodes.size(); ++i) {
    if (!(m.nodes[i].theta_deg > m.nodes[i - 1].theta_deg)) fail("gait_map.nodes", "theta not increasing");
  }
  return m;
}

Metrics metrics_from_json(const Json& j) {
  Metrics m;
  try {
    m.delta = j.at("delta").get<double>();
    m.max_abs_e = j.at("max_abs_e").get<double>();
    m.cycles = j.at("cycles").get<int>();
    if (j.contains("T_c") && !j.at("T_c").is_null()) m.completion_time = j.at("T_c").get<double>();
    for (const auto& s : j.value("per_segment", Json::array())) {
      SegmentStats st;
      st.segment = s.at("segment").get<std::size_t>();
      st.samples = s.at("samples").get<int>();
      st.sum_abs_e = s.at("sum_abs_e").get<double>();
      st.max_abs_e = s.at("max_abs_e").get<double>();
      m.per_segment.push_back(st);
    }
  } catch (const nlohmann::json::exception& e) {
    fail("metrics", e.what());
  }
  return m;
}

ScenarioConfig scenario_from_json(const Json& j, const std::filesystem::path& base_dir) {
  require_object(j, "scenario");
  ScenarioConfig c;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail("name", "expected a string");
    c.name = j["name"].get<std::string>();
  }
  if (j.contains("robot")) c.robot = robot_params_from_json(j["robot"], "robot");

  const int sources = int(j.contains("gait")) + int(j.contains("canonical")) + int(j.contains("closed_loop"));
  if (sources != 1) fail("gait", "exactly one of gait, canonical, closed_loop is required");
  if (j.contains("gait")) {
    c.gait = gait_params_from_json(j["gait"], "gait");
  } else if (j.contains("canonical")) {
    const auto& k = j["canonical"];
    const auto kind = k.is_string() ? parse_canonical_gait(k.get<std::string>()) : std::nullopt;
    if (!kind) fail("canonical", "unknown canonical gait");
    c.gait = *kind;
  } else {
    const auto& loop = j["closed_loop"];
    require_object(loop, "closed_loop");
    ClosedLoopSource src;
    if (!loop.contains("path")) fail("closed_loop.path", "missing");
    src.path = path_from_json(loop["path"], "closed_loop.path");
    if (loop.contains("controller")) src.controller = controller_from_json(loop["controller"], "closed_loop.controller");
    src.heading_bias_deg = get_number(loop, "closed_loop", "heading_bias_deg", 0.0);
    if (loop.contains("map_file")) {
      if (!loop["map_file"].is_string()) fail("closed_loop.map_file", "expected a string");
      std::filesystem::path mf = loop["map_file"].get<std::string>();
      if (mf.is_relative() && !base_dir.empty()) mf = base_dir / mf;
      src.map_file = mf.string();
    }
    c.gait = src;
  }

  if (j.contains("wind") && !j["wind"].is_null()) c.wind = wind_from_json(j["wind"], "wind");
  c.duration = get_number(j, "scenario", "duration", c.duration);
  if (j.contains("max_cycles")) {
    if (!j["max_cycles"].is_number_integer()) fail("max_cycles", "expected an integer");
    c.max_cycles = j["max_cycles"].get<int>();
  }
  if (j.contains("initial_state")) {
    const auto& s = j["initial_state"];
    require_object(s, "initial_state");
    RobotState st;
    st.x = get_number(s, "initial_state", "x", 0.0);
    st.y = get_number(s, "initial_state", "y", 0.0);
    st.xi = deg_to_rad(get_number(s, "initial_state", "xi", 0.0));
    c.initial_state = st;
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    require_object(o, "output");
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) fail("output.dir", "expected a string");
      c.output_dir = o["dir"].get<std::string>();
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("seed", "expected a non-negative integer");
    c.seed = j["seed"].get<unsigned>();
  }
  if (j.contains("integrator")) {
    const auto& in = j["integrator"];
    require_object(in, "integrator");
    c.integrator.rel_tol = get_number(in, "integrator", "rel_tol", c.integrator.rel_tol);
    c.integrator.abs_tol = get_number(in, "integrator", "abs_tol", c.integrator.abs_tol);
    c.integrator.output_interval = get_number(in, "integrator", "output_interval", c.integrator.output_interval);
  }
  validate_scenario(c);
  return c;
}

Json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigInvalid(file.string() + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigInvalid(file.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& file, const Json& j) {
  std::ofstream out(file);
  if (!out) throw ConfigInvalid(file.string() + ": cannot write");
  out << j.dump(2) << '\n';
}

ScenarioConfig load_scenario(const std::filesystem::path& file) {
  return scenario_from_json(read_json_file(file), file.parent_path());
}

GaitMap load_gait_map(const std::filesystem::path& file) { return gait_map_from_json(read_json_file(file)); }

void save_gait_map(const std::filesystem::path& file, const GaitMap& map) { write_json_file(file, to_json(map)); }

}  // namespace tripod::config
