#include "tripod/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tripod {

std::vector<Vec2> Path::route() const {
  std::vector<Vec2> r = waypoints;
  if (closed && !waypoints.empty()) r.push_back(waypoints.front());
  return r;
}

const Path& validate_path(const Path& path) {
  if (path.waypoints.size() < 2) throw ConfigInvalid("path.waypoints: need at least 2 waypoints");
  if (!(path.capture_radius > 0.0)) throw ConfigInvalid("path.capture_radius: must be positive");
  for (const auto& w : path.waypoints) {
    if (!std::isfinite(w.x) || !std::isfinite(w.y)) throw ConfigInvalid("path.waypoints: non-finite entry");
  }
  return path;
}

const PIController& validate_controller(const PIController& ctrl) {
  if (!(ctrl.ts > 0.0)) throw ConfigInvalid("controller.T_s: must be positive");
  if (!(ctrl.windup_limit > 0.0)) throw ConfigInvalid("controller.windup_limit: must be positive");
  if (!(ctrl.correction_limit > 0.0)) throw ConfigInvalid("controller.correction_limit: must be positive");
  if (!std::isfinite(ctrl.kp) || !std::isfinite(ctrl.ki)) throw ConfigInvalid("controller gains: non-finite");
  return ctrl;
}

double desired_heading(const RobotState& state, Vec2 target) {
  const Vec2 d = target - state.position();
  if (d.norm() < 1e-9) throw TargetCoincident("robot is on the target point");
  const double world = rad_to_deg(std::atan2(d.y, d.x));
  return wrap_deg(world - rad_to_deg(state.xi));
}

double path_error(const Path& path, std::size_t segment, Vec2 position) {
  const auto route = path.route();
  if (segment + 1 >= route.size()) throw DegenerateSegment("segment index out of range");
  const Vec2 a = route[segment];
  const Vec2 b = route[segment + 1];
  const Vec2 dir = b - a;
  const double len = dir.norm();
  if (len < 1e-12) throw DegenerateSegment("segment endpoints coincide");
  return 100.0 * dir.cross(position - a) / len;
}

PIOutput pi_update(const PIController& ctrl, double e_cm, double theta_d_deg) {
  PIOutput out;
  out.ctrl = ctrl;
  out.ctrl.integral_accum += e_cm * ctrl.ts;
  if (ctrl.ki != 0.0) {
    const double limit = ctrl.windup_limit / std::abs(ctrl.ki);
    out.ctrl.integral_accum = std::clamp(out.ctrl.integral_accum, -limit, limit);
  }
  ++out.ctrl.k;
  out.correction_deg = std::clamp(ctrl.kp * e_cm + ctrl.ki * out.ctrl.integral_accum, -ctrl.correction_limit,
                                  ctrl.correction_limit);
  out.theta_pi_deg = wrap_deg(theta_d_deg - out.correction_deg);
  return out;
}

ControlOutput control_step(const RobotState& state, const Path& path, const PathState& path_state,
                           const PIController& ctrl, const GaitMap& map, double heading_bias_deg) {
  const auto route = path.route();
  if (path_state.target == 0 || path_state.target >= route.size()) {
    throw PathComplete("path state is past the final waypoint");
  }

  ControlOutput out;
  out.ctrl = ctrl;
  out.path_state = path_state;
  if ((route[out.path_state.target] - state.position()).norm() < path.capture_radius) {
    ++out.path_state.target;
    out.ctrl.integral_accum = 0.0;
    if (out.path_state.target >= route.size()) {
      throw PathComplete("final waypoint captured at t = " + std::to_string(state.t));
    }
  }

  const Vec2 target = route[out.path_state.target];
  const double theta_d = desired_heading(state, target);
  const double e = path_error(path, out.path_state.segment(), state.position());
  const PIOutput pi = pi_update(out.ctrl, e, theta_d);
  out.ctrl = pi.ctrl;

  const HeadingGait sel = select_gait(map, pi.theta_pi_deg + heading_bias_deg);
  out.gait = sel.gait;
  out.diag = {pi.ctrl.k, e, theta_d, pi.theta_pi_deg, sel.zone, sel.alpha_deg, out.path_state.segment(),
              sel.clamped};
  return out;
}

}  // namespace tripod
