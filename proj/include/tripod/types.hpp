#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace tripod {

//! Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public Error { using Error::Error; };
class ContactDegenerate : public Error { using Error::Error; };
class StepFailure : public Error { using Error::Error; };
class MapNotMonotone : public Error { using Error::Error; };
class TargetCoincident : public Error { using Error::Error; };
class DegenerateSegment : public Error { using Error::Error; };
class PathComplete : public Error { using Error::Error; };
class NonPhysical : public Error { using Error::Error; };
class ConfigInvalid : public Error { using Error::Error; };
class PathMismatch : public Error { using Error::Error; };

inline constexpr double kPi = std::numbers::pi;
inline constexpr int kLimbs = 3;

constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

//! Wraps an angle in degrees into the half-open interval (0, 360].
inline double wrap_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w <= 0.0) w += 360.0;
  return w;
}

//! Planar vector in the world frame.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::sqrt(x * x + y * y); }
  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  //! Scalar z-component of the planar cross product.
  constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

//! Geometric, inertial and friction constants of the robot and its surface.
struct RobotParams {
  double body_mass = 0.888;        // kg
  double rot_inertia = 0.5 * 0.888 * 0.05 * 0.05;  // kg m^2, uniform disk of radius R
  double hinge_radius = 0.05;      // m
  double limb_length = 0.075;      // m
  double friction_mu = 0.85;
  double gravity = 9.81;           // m/s^2
  double creep_velocity = 1e-4;    // m/s

  bool operator==(const RobotParams&) const = default;
};

//! Planar pose and velocity of the central body. Heading is never wrapped.
struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double xi = 0.0;      // rad
  double xi_dot = 0.0;  // rad/s
  double t = 0.0;       // s

  Vec2 position() const { return {x, y}; }
  Vec2 velocity() const { return {vx, vy}; }
  bool operator==(const RobotState&) const = default;
};

//! Sinusoidal limb actuation: phi_i = a_i sin(2 pi f t + psi_i).
struct GaitParams {
  std::array<double, kLimbs> amplitudes_deg{0.0, 0.0, 0.0};
  std::array<double, kLimbs> phases_deg{0.0, 0.0, 0.0};
  double frequency_hz = 1.0;

  bool operator==(const GaitParams&) const = default;
};

inline constexpr double kMaxAmplitudeDeg = 30.0;

//! Contact-point kinematics of the three limb tips at one instant.
struct ContactSet {
  std::array<Vec2, kLimbs> position;   // r_i
  std::array<Vec2, kLimbs> velocity;   // dr_i/dt
  std::array<Vec2, kLimbs> hinge;      // limb pivot on the body
  std::array<double, kLimbs> phi{};    // rad
  std::array<double, kLimbs> phi_dot{};  // rad/s
};

//! Uniform, constant wind acting as a point drag force at the COM.
struct WindField {
  double speed = 5.5;            // m/s
  double direction_deg = 0.0;    // world frame, CCW from +x
  double air_density = 1.204;    // kg/m^3 (air at 20 C)
  double drag_coeff = 1.0;
  double frontal_area = 0.02;    // m^2

  bool operator==(const WindField&) const = default;
};

//! Returns params unchanged, or throws InvalidParams naming the first violated invariant.
const RobotParams& validate_params(const RobotParams& params);

//! Throws InvalidParams for out-of-range amplitudes or non-positive frequency.
const GaitParams& validate_gait(const GaitParams& gait);

//! Throws InvalidParams for negative speed, density or drag terms.
const WindField& validate_wind(const WindField& wind);

}  // namespace tripod
