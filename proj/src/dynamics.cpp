#include "tripod/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tripod/gait.hpp"

namespace tripod {

namespace {

constexpr double kMaxCondition = 1e12;

using StateVec = std::array<double, 6>;  // x, y, vx, vy, xi, xi_dot

StateVec pack(const RobotState& s) { return {s.x, s.y, s.vx, s.vy, s.xi, s.xi_dot}; }

RobotState unpack(const StateVec& y, double t) { return {y[0], y[1], y[2], y[3], y[4], y[5], t}; }

// Unit vectors of the three limb base directions in the body frame.
constexpr std::array<Vec2, kLimbs> kBaseDirs{{
    {1.0, 0.0}, {-0.5, 0.86602540378443864676}, {-0.5, -0.86602540378443864676}}};

constexpr Vec2 rotate(const Vec2& v, double c, double s) { return {c * v.x - s * v.y, s * v.x + c * v.y}; }

// Contact geometry once the limb angles are known.
ContactSet place_contacts(const RobotState& s, const std::array<LimbAngle, kLimbs>& limbs,
                          const RobotParams& p) {
  ContactSet c;
  const Vec2 com = s.position();
  const Vec2 vel = s.velocity();
  const double cx = std::cos(s.xi), sx = std::sin(s.xi);
  for (int i = 0; i < kLimbs; ++i) {
    const Vec2 radial = rotate(kBaseDirs[i], cx, sx);
    const Vec2 along = rotate(radial, std::cos(limbs[i].phi), std::sin(limbs[i].phi));
    c.hinge[i] = com + p.hinge_radius * radial;
    c.position[i] = c.hinge[i] + p.limb_length * along;
    // d/dt of the two rotating arms: perpendicular unit vectors scaled by their angular rates.
    const Vec2 radial_perp{-radial.y, radial.x};
    const Vec2 along_perp{-along.y, along.x};
    c.velocity[i] = vel + (p.hinge_radius * s.xi_dot) * radial_perp +
                    (p.limb_length * (s.xi_dot + limbs[i].phi_dot)) * along_perp;
    c.phi[i] = limbs[i].phi;
    c.phi_dot[i] = limbs[i].phi_dot;
  }
  return c;
}

// Same values as limb_angle(), sharing one sin/cos of the carrier phase.
std::array<LimbAngle, kLimbs> limb_angles(const GaitParams& gait, double t) {
  const double omega = 2.0 * kPi * gait.frequency_hz;
  const double sw = std::sin(omega * t), cw = std::cos(omega * t);
  std::array<LimbAngle, kLimbs> out;
  for (int i = 0; i < kLimbs; ++i) {
    const double a = deg_to_rad(gait.amplitudes_deg[i]);
    const double psi = deg_to_rad(gait.phases_deg[i]);
    const double sp = psi == 0.0 ? 0.0 : std::sin(psi), cp = psi == 0.0 ? 1.0 : std::cos(psi);
    out[i] = {a * (sw * cp + cw * sp), a * omega * (cw * cp - sw * sp)};
  }
  return out;
}

}  // namespace

ContactSet contact_kinematics(const RobotState& state, const GaitParams& gait,
                              const RobotParams& params, double t) {
  return place_contacts(state, limb_angles(gait, t), params);
}

NormalForces solve_normal_forces(const ContactSet& contacts, Vec2 com, const RobotParams& params) {
  std::array<Vec2, kLimbs> d;
  for (int i = 0; i < kLimbs; ++i) d[i] = contacts.position[i] - com;

  // A = [1 1 1; dx; dy]. Cofactors of the first row give the barycentric
  // weights of the COM inside the contact triangle.
  const std::array<double, kLimbs> c0{d[1].cross(d[2]), d[2].cross(d[0]), d[0].cross(d[1])};
  const double det = c0[0] + c0[1] + c0[2];

  // Remaining cofactors for the 1-norm condition estimate.
  const std::array<double, kLimbs> c1{d[1].y - d[2].y, d[2].y - d[0].y, d[0].y - d[1].y};
  const std::array<double, kLimbs> c2{d[2].x - d[1].x, d[0].x - d[2].x, d[1].x - d[0].x};

  double norm_a = 0.0;
  for (int i = 0; i < kLimbs; ++i) {
    norm_a = std::max(norm_a, 1.0 + std::abs(d[i].x) + std::abs(d[i].y));
  }
  // Row i of the inverse (times det) is (c0[i], c1[i], c2[i]); 1-norm is the max column sum.
  double norm_inv = 0.0;
  for (const auto* col : {&c0, &c1, &c2}) {
    norm_inv = std::max(norm_inv, std::abs((*col)[0]) + std::abs((*col)[1]) + std::abs((*col)[2]));
  }
  if (det == 0.0 || !std::isfinite(det) || norm_a * norm_inv > kMaxCondition * std::abs(det)) {
    throw ContactDegenerate("contact points are (nearly) collinear");
  }

  const double weight = params.body_mass * params.gravity;
  NormalForces out;
  for (int i = 0; i < kLimbs; ++i) out.n[i] = weight * c0[i] / det;
  return out;
}

std::array<Vec2, kLimbs> friction_forces(const ContactSet& contacts, const NormalForces& normals,
                                         const RobotParams& params) {
  std::array<Vec2, kLimbs> f{};
  for (int i = 0; i < kLimbs; ++i) {
    const Vec2 v = contacts.velocity[i];
    const double speed = v.norm();
    const double scale = params.friction_mu * normals.n[i] / std::max(speed, params.creep_velocity);
    f[i] = v * (-scale);
  }
  return f;
}

Vec2 drag_force(const WindField& wind) {
  const double magnitude =
      0.5 * wind.air_density * wind.drag_coeff * wind.frontal_area * wind.speed * wind.speed;
  const double dir = deg_to_rad(wind.direction_deg);
  return {magnitude * std::cos(dir), magnitude * std::sin(dir)};
}

namespace {

StateDerivative evaluate(const RobotState& s, const std::array<LimbAngle, kLimbs>& limbs,
                         const Vec2& drag, const RobotParams& p) {
  const ContactSet c = place_contacts(s, limbs, p);
  StateDerivative d;
  d.normals = solve_normal_forces(c, s.position(), p);
  d.friction = friction_forces(c, d.normals, p);
  Vec2 force = drag;
  double torque = 0.0;
  for (int i = 0; i < kLimbs; ++i) {
    force += d.friction[i];
    torque += (c.position[i] - s.position()).cross(d.friction[i]);
  }
  d.dx = s.vx;
  d.dy = s.vy;
  d.dvx = force.x / p.body_mass;
  d.dvy = force.y / p.body_mass;
  d.dxi = s.xi_dot;
  d.dxi_dot = torque / p.rot_inertia;
  return d;
}

}  // namespace

StateDerivative state_derivative(const RobotState& state, const GaitParams& gait,
                                 const std::optional<WindField>& wind, const RobotParams& params) {
  const Vec2 drag = wind ? drag_force(*wind) : Vec2{};
  return evaluate(state, limb_angles(gait, state.t), drag, params);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

Segment integrate(const RobotState& start, const GaitParams& gait, const std::optional<WindField>& wind,
                  const RobotParams& params, double duration, const IntegratorOptions& opt) {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw InvalidParams("non-positive duration");
  if (!(opt.output_interval > 0.0)) throw InvalidParams("non-positive output interval");
  validate_params(params);
  validate_gait(gait);
  if (wind) validate_wind(*wind);

  const Vec2 drag = wind ? drag_force(*wind) : Vec2{};
  auto rhs = [&](const StateVec& y, double t) {
    const StateDerivative d = evaluate(unpack(y, t), limb_angles(gait, t), drag, params);
    return StateVec{d.dx, d.dy, d.dvx, d.dvy, d.dxi, d.dxi_dot};
  };

  Segment seg;
  auto record = [&](const StateVec& y, double t) {
    Sample s;
    s.state = unpack(y, t);
    const auto limbs = limb_angles(gait, t);
    for (int i = 0; i < kLimbs; ++i) s.phi[i] = limbs[i].phi;
    s.normals = solve_normal_forces(place_contacts(s.state, limbs, params), s.state.position(), params);
    if (*std::min_element(s.normals.n.begin(), s.normals.n.end()) < 0.0) ++seg.negative_normal_samples;
    seg.samples.push_back(s);
  };

  const double t0 = start.t;
  const double t_end = t0 + duration;
  const long n_out = std::max(1L, std::lround(std::ceil(duration / opt.output_interval - 1e-9)));
  seg.samples.reserve(static_cast<size_t>(n_out) + 1);

  StateVec y = pack(start);
  double t = t0;
  record(y, t);

  StateVec k1 = rhs(y, t);
  double h = std::min({opt.max_step, 1e-4, duration});
  const double time_eps = 1e-12 * std::max(1.0, std::abs(t_end));

  for (long k = 1; k <= n_out; ++k) {
    const double t_next = (k == n_out) ? t_end : t0 + static_cast<double>(k) * opt.output_interval;
    while (t < t_next - time_eps) {
      bool landing = false;
      double step = h;
      if (t + step >= t_next - time_eps) {
        step = t_next - t;
        landing = true;
      }

      StateVec tmp, k2, k3, k4, k5, k6, k7, y_new;
      for (int i = 0; i < 6; ++i) tmp[i] = y[i] + step * a21 * k1[i];
      k2 = rhs(tmp, t + c2 * step);
      for (int i = 0; i < 6; ++i) tmp[i] = y[i] + step * (a31 * k1[i] + a32 * k2[i]);
      k3 = rhs(tmp, t + c3 * step);
      for (int i = 0; i < 6; ++i) tmp[i] = y[i] + step * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = rhs(tmp, t + c4 * step);
      for (int i = 0; i < 6; ++i)
        tmp[i] = y[i] + step * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = rhs(tmp, t + c5 * step);
      for (int i = 0; i < 6; ++i)
        tmp[i] = y[i] + step * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      k6 = rhs(tmp, t + step);
      for (int i = 0; i < 6; ++i)
        y_new[i] = y[i] + step * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      k7 = rhs(y_new, t + step);

      double err = 0.0;
      for (int i = 0; i < 6; ++i) {
        const double e =
            step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double scale = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        err += (e / scale) * (e / scale);
      }
      err = std::sqrt(err / 6.0);

      if (err <= 1.0) {
        t = landing ? t_next : t + step;
        y = y_new;
        k1 = k7;
        ++seg.steps;
        const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        // A step shortened to land on an output time says nothing about the natural step size.
        if (!landing || step >= h) h = std::min(opt.max_step, step * grow);
      } else {
        ++seg.rejected;
        h = step * std::max(0.2, 0.9 * std::pow(err, -0.2));
        if (h < opt.min_step) {
          throw StepFailure("step size underflow at t = " + std::to_string(t));
        }
      }
    }
    record(y, t);
  }
  seg.final_state = unpack(y, t);
  return seg;
}

}  // namespace tripod
