#include "tripod/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "tripod/config.hpp"

namespace tripod {

double calibrate_friction(const CalibrationInput& in) {
  if (!(in.mass > 0.0)) throw InvalidParams("non-positive mass");
  if (!(in.travel > 0.0)) throw InvalidParams("non-positive travel distance");
  if (!(in.slope_deg > 0.0 && in.slope_deg < 90.0)) throw InvalidParams("slope must lie in (0, 90) deg");
  if (!(in.final_speed >= 0.0)) throw InvalidParams("negative final speed");
  if (!(in.gravity > 0.0)) throw InvalidParams("non-positive gravity");

  const double beta = deg_to_rad(in.slope_deg);
  const double potential = in.mass * in.gravity * in.travel * std::sin(beta);
  const double kinetic = 0.5 * in.mass * in.final_speed * in.final_speed;
  double lost = potential - kinetic;
  if (lost < 0.0) {
    // Rounding in a frictionless measurement must not read as energy gain.
    if (lost < -1e-12 * potential) {
      throw NonPhysical("final kinetic energy exceeds the potential energy released");
    }
    lost = 0.0;
  }
  return lost / (in.travel * in.mass * in.gravity * std::cos(beta));
}

bool is_closed_loop(const ScenarioConfig& config) {
  return std::holds_alternative<ClosedLoopSource>(config.gait);
}

void validate_scenario(const ScenarioConfig& c) {
  try {
    validate_params(c.robot);
  } catch (const InvalidParams& e) {
    throw ConfigInvalid(std::string("robot: ") + e.what());
  }
  if (c.wind) {
    try {
      validate_wind(*c.wind);
    } catch (const InvalidParams& e) {
      throw ConfigInvalid(std::string("wind: ") + e.what());
    }
  }
  if (const auto* g = std::get_if<GaitParams>(&c.gait)) {
    try {
      validate_gait(*g);
    } catch (const InvalidParams& e) {
      throw ConfigInvalid(std::string("gait: ") + e.what());
    }
  }
  if (const auto* cl = std::get_if<ClosedLoopSource>(&c.gait)) {
    validate_path(cl->path);
    validate_controller(cl->controller);
    if (!cl->map && cl->map_file.empty()) throw ConfigInvalid("closed_loop.map_file: missing");
    if (c.max_cycles <= 0) throw ConfigInvalid("max_cycles: must be positive");
    if (!std::isfinite(cl->heading_bias_deg)) throw ConfigInvalid("closed_loop.heading_bias_deg: non-finite");
  } else if (!(c.duration > 0.0) || !std::isfinite(c.duration)) {
    throw ConfigInvalid("duration: must be positive");
  }
  if (!(c.integrator.rel_tol > 0.0) || !(c.integrator.abs_tol > 0.0)) {
    throw ConfigInvalid("integrator: tolerances must be positive");
  }
  if (!(c.integrator.output_interval > 0.0)) throw ConfigInvalid("integrator.output_interval: must be positive");
}

namespace {

// Accumulates the per-cycle error samples the same way at run time and on replay.
struct MetricsBuilder {
  Metrics m;
  std::map<std::size_t, SegmentStats> segments;

  void add(std::size_t segment, double e_m) {
    const double a = std::abs(e_m);
    m.delta += a;
    m.max_abs_e = std::max(m.max_abs_e, a);
    ++m.cycles;
    auto& s = segments[segment];
    s.segment = segment;
    ++s.samples;
    s.sum_abs_e += a;
    s.max_abs_e = std::max(s.max_abs_e, a);
  }

  Metrics finish() {
    for (const auto& [k, s] : segments) m.per_segment.push_back(s);
    return m;
  }
};

bool final_capture(const Path& path, const PathState& ps, Vec2 position) {
  const auto route = path.route();
  return ps.target + 1 == route.size() && (route[ps.target] - position).norm() < path.capture_radius;
}

ScenarioResult run_open_loop(const ScenarioConfig& c, const GaitParams& gait) {
  const RobotState start = c.initial_state.value_or(RobotState{});
  const Segment seg = integrate(start, gait, c.wind, c.robot, c.duration, c.integrator);
  ScenarioResult r;
  r.trace.reserve(seg.samples.size());
  for (const auto& s : seg.samples) r.trace.push_back({s, std::nullopt});
  r.negative_normal_samples = seg.negative_normal_samples;
  r.metrics.cycles = static_cast<int>(std::floor(c.duration * gait.frequency_hz + 1e-9));
  return r;
}

ScenarioResult run_closed_loop(const ScenarioConfig& c, const ClosedLoopSource& src) {
  const GaitMap map = src.map ? *src.map : config::load_gait_map(src.map_file);
  const auto route = src.path.route();

  RobotState state;
  if (c.initial_state) {
    state = *c.initial_state;
  } else {
    state.x = route.front().x;
    state.y = route.front().y;
  }

  ScenarioResult r;
  r.path = src.path;
  PIController ctrl = src.controller;
  ctrl.integral_accum = 0.0;
  ctrl.k = 0;
  PathState ps;
  MetricsBuilder mb;

  {
    Sample first;
    first.state = state;
    r.trace.push_back({first, std::nullopt});
  }

  bool complete = false;
  for (int cycle = 0; cycle < c.max_cycles; ++cycle) {
    ControlOutput out;
    try {
      out = control_step(state, src.path, ps, ctrl, map, src.heading_bias_deg);
    } catch (const PathComplete&) {
      complete = true;
      break;
    }
    ctrl = out.ctrl;
    ps = out.path_state;
    mb.add(out.diag.segment, out.diag.e_cm / 100.0);
    r.trace.back().control = out.diag;

    const Segment seg = integrate(state, out.gait, c.wind, c.robot, ctrl.ts, c.integrator);
    r.negative_normal_samples += seg.negative_normal_samples;
    if (cycle == 0) r.trace.back().sample = seg.samples.front();
    for (size_t i = 1; i < seg.samples.size(); ++i) r.trace.push_back({seg.samples[i], std::nullopt});
    state = seg.final_state;
  }
  if (!complete) complete = final_capture(src.path, ps, state.position());

  r.metrics = mb.finish();
  if (complete) r.metrics.completion_time = state.t;
  return r;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
  validate_scenario(config);
  if (const auto* g = std::get_if<GaitParams>(&config.gait)) return run_open_loop(config, *g);
  if (const auto* k = std::get_if<CanonicalGait>(&config.gait)) return run_open_loop(config, canonical_gait(*k));
  return run_closed_loop(config, std::get<ClosedLoopSource>(config.gait));
}

Metrics recompute_metrics(const std::vector<TraceRow>& trace, const Path& path) {
  validate_path(path);
  const auto route = path.route();
  PathState ps;
  MetricsBuilder mb;
  for (const auto& row : trace) {
    if (!row.control) continue;
    const Vec2 pos = row.sample.state.position();
    if (ps.target < route.size() && (route[ps.target] - pos).norm() < path.capture_radius) ++ps.target;
    mb.add(ps.segment(), path_error(path, ps.segment(), pos) / 100.0);
  }
  Metrics m = mb.finish();
  if (!trace.empty()) {
    const auto& last = trace.back().sample.state;
    if (final_capture(path, ps, last.position())) m.completion_time = last.t;
  }
  return m;
}

// --- CSV ---------------------------------------------------------------------

namespace {

void put(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, res.ptr);
}

double parse_double(std::string_view s, size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigInvalid("trace line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << kTraceHeader << '\n';
  std::string line;
  for (const auto& row : trace) {
    line.clear();
    const auto& s = row.sample.state;
    for (double v : {s.t, s.x, s.y, s.xi, s.vx, s.vy, s.xi_dot, row.sample.phi[0], row.sample.phi[1],
                     row.sample.phi[2], row.sample.normals.n[0], row.sample.normals.n[1],
                     row.sample.normals.n[2]}) {
      put(line, v);
      line += ',';
    }
    if (row.control) {
      const auto& c = *row.control;
      put(line, c.e_cm / 100.0);
      line += ',';
      put(line, c.theta_d_deg);
      line += ',';
      put(line, c.theta_pi_deg);
      line += ',';
      line += std::to_string(c.zone);
      line += ',';
      put(line, c.alpha_deg);
    } else {
      line += ",,,,";
    }
    out << line << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw ConfigInvalid("trace: unexpected header");
  std::vector<TraceRow> trace;
  size_t line_no = 1;
  long k = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const auto pos = rest.find(',');
      cells.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (cells.size() != 18) throw ConfigInvalid("trace line " + std::to_string(line_no) + ": expected 18 columns");
    std::array<double, 13> v{};
    for (size_t i = 0; i < v.size(); ++i) v[i] = parse_double(cells[i], line_no);
    TraceRow row;
    row.sample.state = {v[1], v[2], v[4], v[5], v[3], v[6], v[0]};
    row.sample.phi = {v[7], v[8], v[9]};
    row.sample.normals.n = {v[10], v[11], v[12]};
    if (!cells[13].empty()) {
      ControlDiagnostics c;
      c.k = ++k;
      c.e_cm = parse_double(cells[13], line_no) * 100.0;
      c.theta_d_deg = parse_double(cells[14], line_no);
      c.theta_pi_deg = parse_double(cells[15], line_no);
      c.zone = static_cast<int>(parse_double(cells[16], line_no));
      c.alpha_deg = parse_double(cells[17], line_no);
      row.control = c;
    }
    trace.push_back(row);
  }
  return trace;
}

void save_trace(const std::filesystem::path& file, const std::vector<TraceRow>& trace) {
  std::ofstream out(file);
  if (!out) throw ConfigInvalid(file.string() + ": cannot write");
  write_trace_csv(out, trace);
}

std::vector<TraceRow> load_trace(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigInvalid(file.string() + ": cannot open");
  return read_trace_csv(in);
}

void write_scenario_outputs(const std::filesystem::path& dir, const ScenarioConfig& config,
                            const ScenarioResult& result) {
  std::filesystem::create_directories(dir);
  save_trace(dir / "trace.csv", result.trace);
  auto j = config::to_json(result.metrics);
  j["name"] = config.name;
  j["negative_normal_samples"] = result.negative_normal_samples;
  if (result.path) j["path"] = config::to_json(*result.path);
  if (const auto* cl = std::get_if<ClosedLoopSource>(&config.gait)) {
    j["controller"] = config::to_json(cl->controller);
    j["heading_bias_deg"] = cl->heading_bias_deg;
  }
  j["wind"] = config.wind ? config::to_json(*config.wind) : config::Json(nullptr);
  config::write_json_file(dir / "metrics.json", j);
}

RunRecord load_run(const std::filesystem::path& dir) {
  RunRecord r;
  r.trace = load_trace(dir / "trace.csv");
  const auto j = config::read_json_file(dir / "metrics.json");
  r.metrics = config::metrics_from_json(j);
  r.label = j.value("name", dir.filename().string());
  if (j.contains("path") && !j["path"].is_null()) r.path = config::path_from_json(j["path"], "metrics.path");
  return r;
}

ComparisonReport compare_runs(const RunRecord& a, const RunRecord& b) {
  if (a.path != b.path) throw PathMismatch("runs '" + a.label + "' and '" + b.label + "' follow different paths");
  ComparisonReport rep;
  rep.label_a = a.label;
  rep.label_b = b.label;
  rep.a = a.metrics;
  rep.b = b.metrics;
  rep.delta_change = b.metrics.delta - a.metrics.delta;
  rep.delta_reduction = a.metrics.delta > 0.0 ? 1.0 - b.metrics.delta / a.metrics.delta : 0.0;
  if (a.metrics.completion_time && b.metrics.completion_time) {
    rep.completion_change = *b.metrics.completion_time - *a.metrics.completion_time;
  }
  rep.max_abs_e_change = b.metrics.max_abs_e - a.metrics.max_abs_e;

  std::map<std::size_t, SegmentComparison> segs;
  for (const auto& s : a.metrics.per_segment) {
    segs[s.segment].segment = s.segment;
    segs[s.segment].a = s;
  }
  for (const auto& s : b.metrics.per_segment) {
    segs[s.segment].segment = s.segment;
    segs[s.segment].b = s;
  }
  for (const auto& [k, s] : segs) rep.segments.push_back(s);
  return rep;
}

namespace {

std::string fmt_time(const std::optional<double>& t) {
  if (!t) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(0) << *t;
  return os.str();
}

}  // namespace

void print_report(std::ostream& out, const ComparisonReport& r) {
  out << std::fixed << std::setprecision(4);
  out << "A: " << r.label_a << "\nB: " << r.label_b << "\n\n";
  out << "metric          " << std::setw(14) << "A" << std::setw(14) << "B" << std::setw(14) << "B - A" << '\n';
  out << "Delta [m]       " << std::setw(14) << r.a.delta << std::setw(14) << r.b.delta << std::setw(14)
      << r.delta_change << '\n';
  out << "T_c [s]         " << std::setw(14) << fmt_time(r.a.completion_time) << std::setw(14)
      << fmt_time(r.b.completion_time) << std::setw(14)
      << (r.completion_change ? fmt_time(r.completion_change) : std::string("-")) << '\n';
  out << "max |e| [m]     " << std::setw(14) << r.a.max_abs_e << std::setw(14) << r.b.max_abs_e << std::setw(14)
      << r.max_abs_e_change << '\n';
  out << "cycles          " << std::setw(14) << r.a.cycles << std::setw(14) << r.b.cycles << '\n';
  out << std::setprecision(1) << "Delta reduction " << std::setw(13) << 100.0 * r.delta_reduction << "%\n";
  out << std::setprecision(4) << "\nsegment   mean|e| A     mean|e| B     max|e| A      max|e| B\n";
  for (const auto& s : r.segments) {
    out << std::setw(7) << s.segment << std::setw(14) << s.a.mean_abs_e() << std::setw(14) << s.b.mean_abs_e()
        << std::setw(14) << s.a.max_abs_e << std::setw(14) << s.b.max_abs_e << '\n';
  }
  out << std::defaultfloat;
}

SummaryTable summarize(const std::vector<std::string>& flows, const std::vector<RunRecord>& runs) {
  if (runs.size() != 2 * flows.size()) {
    throw ConfigInvalid("summary table needs one (no-PI, PI) pair of runs per flow condition");
  }
  SummaryTable t;
  t.flows = flows;
  for (size_t f = 0; f < flows.size(); ++f) {
    if (runs[2 * f].path != runs[2 * f + 1].path || runs[2 * f].path != runs[0].path) {
      throw PathMismatch("summary table runs follow different paths");
    }
    t.cells[0].push_back(runs[2 * f].metrics);
    t.cells[1].push_back(runs[2 * f + 1].metrics);
  }
  return t;
}

void print_table(std::ostream& out, const SummaryTable& t) {
  out << std::setw(10) << "";
  for (const auto& f : t.flows) out << " | " << std::setw(17) << f;
  out << '\n' << std::setw(10) << "";
  for (size_t i = 0; i < t.flows.size(); ++i) out << " | " << std::setw(8) << "Delta" << std::setw(9) << "T_c";
  out << '\n';
  out << std::fixed;
  for (int c = 0; c < 2; ++c) {
    out << std::setw(10) << t.controls[static_cast<size_t>(c)];
    for (const auto& m : t.cells[static_cast<size_t>(c)]) {
      out << " | " << std::setw(8) << std::setprecision(3) << m.delta << std::setw(9)
          << fmt_time(m.completion_time);
    }
    out << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace tripod
