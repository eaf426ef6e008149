#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "tripod/config.hpp"
#include "tripod/control.hpp"
#include "tripod/dynamics.hpp"
#include "tripod/gait.hpp"
#include "tripod/harness.hpp"

namespace py = pybind11;
using namespace tripod;

namespace {

// JSON crosses the boundary as text; the Python side wraps it with json.loads.
std::string dump(const config::Json& j) { return j.dump(); }

template <typename T>
std::string repr_json(const T& v) {
  return dump(config::to_json(v));
}

ScenarioConfig scenario_from_text(const std::string& text, const std::string& base_dir) {
  return config::scenario_from_json(config::Json::parse(text), base_dir);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tripedal friction-driven robot: dynamics, gait synthesis and path following.";

  auto base = py::register_exception<Error>(m, "TripodError", PyExc_RuntimeError);
  py::register_exception<InvalidParams>(m, "InvalidParams", base.ptr());
  py::register_exception<ContactDegenerate>(m, "ContactDegenerate", base.ptr());
  py::register_exception<StepFailure>(m, "StepFailure", base.ptr());
  py::register_exception<MapNotMonotone>(m, "MapNotMonotone", base.ptr());
  py::register_exception<TargetCoincident>(m, "TargetCoincident", base.ptr());
  py::register_exception<DegenerateSegment>(m, "DegenerateSegment", base.ptr());
  py::register_exception<PathComplete>(m, "PathComplete", base.ptr());
  py::register_exception<NonPhysical>(m, "NonPhysical", base.ptr());
  py::register_exception<ConfigInvalid>(m, "ConfigInvalid", base.ptr());
  py::register_exception<PathMismatch>(m, "PathMismatch", base.ptr());

  py::class_<Vec2>(m, "Vec2")
      .def(py::init<>())
      .def(py::init([](double x, double y) { return Vec2{x, y}; }), py::arg("x"), py::arg("y"))
      .def_readwrite("x", &Vec2::x)
      .def_readwrite("y", &Vec2::y)
      .def("norm", &Vec2::norm)
      .def("__iter__", [](const Vec2& v) { return py::iter(py::make_tuple(v.x, v.y)); })
      .def("__repr__", [](const Vec2& v) {
        std::ostringstream os;
        os << "Vec2(" << v.x << ", " << v.y << ")";
        return os.str();
      });

  py::class_<RobotParams>(m, "RobotParams")
      .def(py::init<>())
      .def_readwrite("body_mass", &RobotParams::body_mass)
      .def_readwrite("rot_inertia", &RobotParams::rot_inertia)
      .def_readwrite("hinge_radius", &RobotParams::hinge_radius)
      .def_readwrite("limb_length", &RobotParams::limb_length)
      .def_readwrite("friction_mu", &RobotParams::friction_mu)
      .def_readwrite("gravity", &RobotParams::gravity)
      .def_readwrite("creep_velocity", &RobotParams::creep_velocity)
      .def("validate", [](const RobotParams& p) { validate_params(p); })
      .def(py::self == py::self)
      .def("__repr__", [](const RobotParams& p) { return "RobotParams(" + repr_json(p) + ")"; });

  py::class_<RobotState>(m, "RobotState")
      .def(py::init<>())
      .def(py::init([](double x, double y, double xi) {
             RobotState s;
             s.x = x;
             s.y = y;
             s.xi = xi;
             return s;
           }),
           py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("xi") = 0.0)
      .def_readwrite("x", &RobotState::x)
      .def_readwrite("y", &RobotState::y)
      .def_readwrite("vx", &RobotState::vx)
      .def_readwrite("vy", &RobotState::vy)
      .def_readwrite("xi", &RobotState::xi)
      .def_readwrite("xi_dot", &RobotState::xi_dot)
      .def_readwrite("t", &RobotState::t)
      .def(py::self == py::self)
      .def("__repr__", [](const RobotState& s) {
        std::ostringstream os;
        os << "RobotState(t=" << s.t << ", x=" << s.x << ", y=" << s.y << ", xi=" << s.xi << ")";
        return os.str();
      });

  py::class_<GaitParams>(m, "GaitParams")
      .def(py::init<>())
      .def(py::init([](std::array<double, 3> a, std::array<double, 3> ph, double f) {
             return GaitParams{a, ph, f};
           }),
           py::arg("amplitudes_deg"), py::arg("phases_deg") = std::array<double, 3>{0, 0, 0},
           py::arg("frequency_hz") = 1.0)
      .def_readwrite("amplitudes_deg", &GaitParams::amplitudes_deg)
      .def_readwrite("phases_deg", &GaitParams::phases_deg)
      .def_readwrite("frequency_hz", &GaitParams::frequency_hz)
      .def(py::self == py::self)
      .def("__repr__", [](const GaitParams& g) { return "GaitParams(" + repr_json(g) + ")"; });

  py::class_<WindField>(m, "WindField")
      .def(py::init<>())
      .def(py::init([](double speed, double direction_deg) {
             WindField w;
             w.speed = speed;
             w.direction_deg = direction_deg;
             return w;
           }),
           py::arg("speed"), py::arg("direction_deg") = 0.0)
      .def_readwrite("speed", &WindField::speed)
      .def_readwrite("direction_deg", &WindField::direction_deg)
      .def_readwrite("air_density", &WindField::air_density)
      .def_readwrite("drag_coeff", &WindField::drag_coeff)
      .def_readwrite("frontal_area", &WindField::frontal_area)
      .def("__repr__", [](const WindField& w) { return "WindField(" + repr_json(w) + ")"; });

  py::class_<ContactSet>(m, "ContactSet")
      .def_readonly("position", &ContactSet::position)
      .def_readonly("velocity", &ContactSet::velocity)
      .def_readonly("hinge", &ContactSet::hinge)
      .def_readonly("phi", &ContactSet::phi)
      .def_readonly("phi_dot", &ContactSet::phi_dot);

  py::class_<NormalForces>(m, "NormalForces")
      .def_readonly("n", &NormalForces::n)
      .def("sum", &NormalForces::sum);

  py::class_<StateDerivative>(m, "StateDerivative")
      .def_readonly("dx", &StateDerivative::dx)
      .def_readonly("dy", &StateDerivative::dy)
      .def_readonly("dvx", &StateDerivative::dvx)
      .def_readonly("dvy", &StateDerivative::dvy)
      .def_readonly("dxi", &StateDerivative::dxi)
      .def_readonly("dxi_dot", &StateDerivative::dxi_dot)
      .def_readonly("friction", &StateDerivative::friction)
      .def_readonly("normals", &StateDerivative::normals);

  py::class_<IntegratorOptions>(m, "IntegratorOptions")
      .def(py::init<>())
      .def_readwrite("rel_tol", &IntegratorOptions::rel_tol)
      .def_readwrite("abs_tol", &IntegratorOptions::abs_tol)
      .def_readwrite("output_interval", &IntegratorOptions::output_interval)
      .def_readwrite("min_step", &IntegratorOptions::min_step)
      .def_readwrite("max_step", &IntegratorOptions::max_step);

  py::class_<Sample>(m, "Sample")
      .def_readonly("state", &Sample::state)
      .def_readonly("phi", &Sample::phi)
      .def_readonly("normals", &Sample::normals);

  py::class_<Segment>(m, "Segment")
      .def_readonly("samples", &Segment::samples)
      .def_readonly("final_state", &Segment::final_state)
      .def_readonly("steps", &Segment::steps)
      .def_readonly("rejected", &Segment::rejected)
      .def_readonly("negative_normal_samples", &Segment::negative_normal_samples);

  m.def("wrap_deg", &wrap_deg, py::arg("deg"));
  m.def("contact_kinematics", &contact_kinematics, py::arg("state"), py::arg("gait"), py::arg("params"),
        py::arg("t"));
  m.def("solve_normal_forces", &solve_normal_forces, py::arg("contacts"), py::arg("com"), py::arg("params"));
  m.def("friction_forces", &friction_forces, py::arg("contacts"), py::arg("normals"), py::arg("params"));
  m.def("drag_force", &drag_force, py::arg("wind"));
  m.def("state_derivative", &state_derivative, py::arg("state"), py::arg("gait"), py::arg("wind") = py::none(),
        py::arg("params") = RobotParams{});
  m.def("integrate", &integrate, py::arg("state"), py::arg("gait"), py::arg("wind") = py::none(),
        py::arg("params") = RobotParams{}, py::arg("duration") = 1.0, py::arg("options") = IntegratorOptions{},
        py::call_guard<py::gil_scoped_release>());

  // --- gait
  py::enum_<CanonicalGait>(m, "CanonicalGait")
      .value("translate_limb_1", CanonicalGait::translate_limb_1)
      .value("translate_limb_2", CanonicalGait::translate_limb_2)
      .value("translate_limb_3", CanonicalGait::translate_limb_3)
      .value("rotate_cw", CanonicalGait::rotate_cw)
      .value("rotate_ccw", CanonicalGait::rotate_ccw);
  m.def("canonical_gait", &canonical_gait, py::arg("kind"));
  m.def(
      "limb_angle",
      [](const GaitParams& g, int limb, double t) {
        if (limb < 0 || limb >= kLimbs) throw py::index_error("limb index must be 0, 1 or 2");
        const auto la = limb_angle(g, limb, t);
        return py::make_tuple(la.phi, la.phi_dot);
      },
      py::arg("gait"), py::arg("limb"), py::arg("t"));

  py::class_<Zone>(m, "Zone")
      .def_readonly("id", &Zone::id)
      .def_readonly("lower_deg", &Zone::lower_deg)
      .def_readonly("alpha_limb", &Zone::alpha_limb)
      .def_readonly("alpha_sign", &Zone::alpha_sign)
      .def("amplitudes", &Zone::amplitudes, py::arg("alpha_deg"));
  m.def("zone_select", &zone_select, py::arg("theta_deg"), py::return_value_policy::reference);

  py::class_<GaitMap>(m, "GaitMap")
      .def(py::init<>())
      .def_property_readonly("nodes",
                             [](const GaitMap& g) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& n : g.nodes) out.emplace_back(n.theta_deg, n.alpha_deg);
                               return out;
                             })
      .def_property_readonly("series",
                             [](const GaitMap& g) {
                               py::dict out;
                               for (const auto& s : g.per_mu) {
                                 py::list rows;
                                 for (const auto& x : s.samples) {
                                   rows.append(py::make_tuple(x.alpha_deg, x.theta_avg_deg, x.theta_std_deg));
                                 }
                                 out[py::float_(s.mu)] = rows;
                               }
                               return out;
                             })
      .def_readonly("reversed", &GaitMap::reversed)
      .def_readonly("cycles", &GaitMap::cycles)
      .def(py::self == py::self)
      .def("to_json", [](const GaitMap& g) { return repr_json(g); });

  py::class_<GaitMapOptions>(m, "GaitMapOptions")
      .def(py::init<>())
      .def_readwrite("mu_list", &GaitMapOptions::mu_list)
      .def_readwrite("alpha_grid_deg", &GaitMapOptions::alpha_grid_deg)
      .def_readwrite("cycles", &GaitMapOptions::cycles)
      .def_readwrite("discard_cycles", &GaitMapOptions::discard_cycles)
      .def_readwrite("resolve_orientation", &GaitMapOptions::resolve_orientation)
      .def_readwrite("orientation_cycles", &GaitMapOptions::orientation_cycles)
      .def_readwrite("threads", &GaitMapOptions::threads);

  m.def("build_gait_map", &build_gait_map, py::arg("params") = RobotParams{},
        py::arg("options") = GaitMapOptions{}, py::call_guard<py::gil_scoped_release>());
  m.def("cycle_headings_deg", &cycle_headings_deg, py::arg("params"), py::arg("gait"), py::arg("cycles"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "map_lookup",
      [](const GaitMap& g, double theta) {
        const auto r = map_lookup(g, theta);
        return py::make_tuple(r.alpha_deg, r.clamped);
      },
      py::arg("map"), py::arg("theta_zone_deg"));

  py::class_<HeadingGait>(m, "HeadingGait")
      .def_readonly("gait", &HeadingGait::gait)
      .def_readonly("zone", &HeadingGait::zone)
      .def_readonly("alpha_deg", &HeadingGait::alpha_deg)
      .def_readonly("clamped", &HeadingGait::clamped);
  m.def("select_gait", &select_gait, py::arg("map"), py::arg("theta_body_deg"));
  m.def("gait_for_heading", &gait_for_heading, py::arg("map"), py::arg("theta_body_deg"));
  m.def("load_gait_map", &config::load_gait_map, py::arg("file"));
  m.def("save_gait_map", &config::save_gait_map, py::arg("file"), py::arg("map"));

  // --- control
  py::class_<Path>(m, "Path")
      .def(py::init([](const std::vector<std::pair<double, double>>& pts, double capture_radius, bool closed) {
             Path p;
             for (const auto& [x, y] : pts) p.waypoints.push_back({x, y});
             p.capture_radius = capture_radius;
             p.closed = closed;
             return validate_path(p);
           }),
           py::arg("waypoints"), py::arg("capture_radius") = 0.02, py::arg("closed") = false)
      .def_property_readonly("waypoints",
                             [](const Path& p) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& w : p.waypoints) out.emplace_back(w.x, w.y);
                               return out;
                             })
      .def_readonly("capture_radius", &Path::capture_radius)
      .def_readonly("closed", &Path::closed);

  py::class_<PIController>(m, "PIController")
      .def(py::init<>())
      .def_readwrite("kp", &PIController::kp)
      .def_readwrite("ki", &PIController::ki)
      .def_readwrite("ts", &PIController::ts)
      .def_readwrite("integral_accum", &PIController::integral_accum)
      .def_readwrite("windup_limit", &PIController::windup_limit)
      .def_readwrite("correction_limit", &PIController::correction_limit)
      .def_readwrite("k", &PIController::k);

  m.def("desired_heading", &desired_heading, py::arg("state"), py::arg("target"));
  m.def("path_error", &path_error, py::arg("path"), py::arg("segment"), py::arg("position"));
  m.def(
      "pi_update",
      [](const PIController& c, double e_cm, double theta_d) {
        const auto out = pi_update(c, e_cm, theta_d);
        return py::make_tuple(out.theta_pi_deg, out.ctrl);
      },
      py::arg("ctrl"), py::arg("e_cm"), py::arg("theta_d_deg"));

  // --- harness
  m.def(
      "calibrate_friction",
      [](double mass, double slope_deg, double travel, double final_speed, double gravity) {
        return calibrate_friction({mass, slope_deg, travel, final_speed, gravity});
      },
      py::arg("mass"), py::arg("slope_deg"), py::arg("travel"), py::arg("final_speed"), py::arg("gravity") = 9.81);

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("delta", &Metrics::delta)
      .def_readonly("completion_time", &Metrics::completion_time)
      .def_readonly("max_abs_e", &Metrics::max_abs_e)
      .def_readonly("cycles", &Metrics::cycles)
      .def("completed", &Metrics::completed)
      .def(py::self == py::self)
      .def("to_json", [](const Metrics& x) { return repr_json(x); });

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readwrite("name", &ScenarioConfig::name)
      .def_readwrite("robot", &ScenarioConfig::robot)
      .def_readwrite("wind", &ScenarioConfig::wind)
      .def_readwrite("duration", &ScenarioConfig::duration)
      .def_readwrite("max_cycles", &ScenarioConfig::max_cycles)
      .def_readwrite("output_dir", &ScenarioConfig::output_dir)
      .def("is_closed_loop", [](const ScenarioConfig& c) { return is_closed_loop(c); })
      .def("to_json", [](const ScenarioConfig& c) { return repr_json(c); })
      .def(
          "set_heading_bias",
          [](ScenarioConfig& c, double bias) { std::get<ClosedLoopSource>(c.gait).heading_bias_deg = bias; },
          py::arg("bias_deg"))
      .def(
          "disable_pi",
          [](ScenarioConfig& c) {
            auto& ctrl = std::get<ClosedLoopSource>(c.gait).controller;
            ctrl.kp = 0.0;
            ctrl.ki = 0.0;
          })
      .def(
          "set_map", [](ScenarioConfig& c, const GaitMap& g) { std::get<ClosedLoopSource>(c.gait).map = g; },
          py::arg("map"));

  m.def("load_scenario", &config::load_scenario, py::arg("file"));
  m.def("scenario_from_json", &scenario_from_text, py::arg("text"), py::arg("base_dir") = "");

  py::class_<ScenarioResult>(m, "ScenarioResult")
      .def_readonly("metrics", &ScenarioResult::metrics)
      .def_readonly("negative_normal_samples", &ScenarioResult::negative_normal_samples)
      .def_property_readonly("rows", [](const ScenarioResult& r) { return r.trace.size(); })
      .def(
          "states", [](const ScenarioResult& r) {
            std::vector<RobotState> out;
            out.reserve(r.trace.size());
            for (const auto& row : r.trace) out.push_back(row.sample.state);
            return out;
          })
      .def("trace_csv", [](const ScenarioResult& r) {
        std::ostringstream os;
        write_trace_csv(os, r.trace);
        return os.str();
      });

  m.def("run_scenario", &run_scenario, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("write_scenario_outputs", &write_scenario_outputs, py::arg("dir"), py::arg("config"), py::arg("result"));
  m.def(
      "recompute_metrics",
      [](const std::filesystem::path& dir) {
        const auto run = load_run(dir);
        if (!run.path) throw ConfigInvalid("metrics.json has no path; not a closed-loop run");
        return recompute_metrics(run.trace, *run.path);
      },
      py::arg("dir"));
  m.def(
      "compare_runs",
      [](const std::filesystem::path& a, const std::filesystem::path& b) {
        const auto rep = compare_runs(load_run(a), load_run(b));
        std::ostringstream os;
        print_report(os, rep);
        py::dict d;
        d["delta_a"] = rep.a.delta;
        d["delta_b"] = rep.b.delta;
        d["delta_change"] = rep.delta_change;
        d["delta_reduction"] = rep.delta_reduction;
        d["max_abs_e_change"] = rep.max_abs_e_change;
        d["completion_change"] = rep.completion_change;
        d["text"] = os.str();
        return d;
      },
      py::arg("dir_a"), py::arg("dir_b"));
}
