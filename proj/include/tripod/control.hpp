#pragma once

#include <cstddef>
#include <vector>

#include "tripod/gait.hpp"
#include "tripod/types.hpp"

namespace tripod {

//! Ordered target points. A closed path returns to its first waypoint once.
struct Path {
  std::vector<Vec2> waypoints;
  double capture_radius = 0.02;  // m
  bool closed = false;

  //! Waypoints in visiting order, with the first repeated at the end for closed paths.
  std::vector<Vec2> route() const;
  bool operator==(const Path&) const = default;
};

//! Throws ConfigInvalid unless the path has >= 2 waypoints and a positive capture radius.
const Path& validate_path(const Path& path);

//! Progress along a path: route()[target - 1] -> route()[target] is the active segment.
struct PathState {
  std::size_t target = 1;

  std::size_t segment() const { return target - 1; }
  bool operator==(const PathState&) const = default;
};

//! Discrete PI law on the cross-track error, realized with a running accumulator.
struct PIController {
  double kp = 15.0;              // deg/cm
  double ki = 1.0;               // deg/(cm s)
  double ts = 1.0;               // s, one gait cycle
  double integral_accum = 0.0;   // cm s
  double windup_limit = 60.0;    // deg
  //! Bound on the total correction |K_P e + K_I accum|.
  double correction_limit = 60.0;  // deg
  long k = 0;                    // update counter

  bool operator==(const PIController&) const = default;
};

//! Throws ConfigInvalid for non-positive sample time or windup limit.
const PIController& validate_controller(const PIController& ctrl);

//! Body-frame bearing (deg, (0, 360]) from the robot to target.
double desired_heading(const RobotState& state, Vec2 target);

//! Signed distance (cm) from position to the line through route segment `segment`;
//! positive to the left of the direction of travel.
double path_error(const Path& path, std::size_t segment, Vec2 position);

struct PIOutput {
  double theta_pi_deg = 0.0;
  double correction_deg = 0.0;  // amount subtracted from theta_D
  PIController ctrl;
};

//! One controller update. A positive (leftward) error steers the heading clockwise.
PIOutput pi_update(const PIController& ctrl, double e_cm, double theta_d_deg);

struct ControlDiagnostics {
  long k = 0;
  double e_cm = 0.0;
  double theta_d_deg = 0.0;
  double theta_pi_deg = 0.0;
  int zone = 1;
  double alpha_deg = 0.0;
  std::size_t segment = 0;
  bool clamped = false;
};

struct ControlOutput {
  GaitParams gait;
  PIController ctrl;
  PathState path_state;
  ControlDiagnostics diag;
};

//! Advances waypoint capture, runs the PI law, and selects the gait for the next
//! cycle. `heading_bias_deg` is added to theta_PI before gait selection and models
//! a systematic gait-execution error. Throws PathComplete once the last target is
//! captured.
ControlOutput control_step(const RobotState& state, const Path& path, const PathState& path_state,
                           const PIController& ctrl, const GaitMap& map, double heading_bias_deg = 0.0);

}  // namespace tripod
