#pragma once

#include <array>
#include <optional>
#include <vector>

#include "tripod/types.hpp"

namespace tripod {

struct NormalForces {
  std::array<double, kLimbs> n{};  // N

  double sum() const { return n[0] + n[1] + n[2]; }
};

struct StateDerivative {
  double dx = 0.0;
  double dy = 0.0;
  double dvx = 0.0;
  double dvy = 0.0;
  double dxi = 0.0;
  double dxi_dot = 0.0;
  std::array<Vec2, kLimbs> friction{};
  NormalForces normals;
};

//! Base angle of limb i (0-based) in the body frame.
inline double limb_base_angle(int limb) { return 2.0 * kPi * limb / kLimbs; }

ContactSet contact_kinematics(const RobotState& state, const GaitParams& gait,
                              const RobotParams& params, double t);

//! Solves the vertical force balance and the two normal-force torque balances
//! about the COM. Throws ContactDegenerate for near-collinear contacts.
NormalForces solve_normal_forces(const ContactSet& contacts, Vec2 com, const RobotParams& params);

//! Coulomb friction with a linear creep ramp below params.creep_velocity.
std::array<Vec2, kLimbs> friction_forces(const ContactSet& contacts, const NormalForces& normals,
                                         const RobotParams& params);

//! Quadratic drag at the COM, pointing along the wind direction.
Vec2 drag_force(const WindField& wind);

StateDerivative state_derivative(const RobotState& state, const GaitParams& gait,
                                 const std::optional<WindField>& wind, const RobotParams& params);

struct IntegratorOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  double output_interval = 0.01;  // s
  double min_step = 1e-12;        // s
  double max_step = 0.01;         // s
};

//! One dense output sample of a simulation.
struct Sample {
  RobotState state;
  std::array<double, kLimbs> phi{};  // rad
  NormalForces normals;
};

struct Segment {
  std::vector<Sample> samples;  // includes the initial state at samples.front()
  RobotState final_state;
  long steps = 0;
  long rejected = 0;
  //! Samples whose normal-force solution had a negative entry.
  long negative_normal_samples = 0;
};

//! Advances the equations of motion with an adaptive Dormand-Prince 5(4) pair.
//! Throws StepFailure when the step size underflows options.min_step.
Segment integrate(const RobotState& state, const GaitParams& gait, const std::optional<WindField>& wind,
                  const RobotParams& params, double duration, const IntegratorOptions& options = {});

}  // namespace tripod
