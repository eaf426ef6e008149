#include <cmath>
#include <random>

#include "doctest.h"
#include "tripod/dynamics.hpp"
#include "tripod/gait.hpp"

using namespace tripod;

namespace {

Vec2 rot(Vec2 v, double deg) {
  const double a = deg_to_rad(deg);
  return {std::cos(a) * v.x - std::sin(a) * v.y, std::sin(a) * v.x + std::cos(a) * v.y};
}

// Random state and gait sampled at a random time, inside the paper's amplitude range.
struct RandomCase {
  RobotState state;
  GaitParams gait;
};

RandomCase random_case(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-1.0, 1.0), vel(-0.2, 0.2), ang(-kPi, kPi), amp(-30.0, 30.0),
      ph(0.0, 360.0), t(0.0, 10.0);
  RandomCase c;
  c.state = {pos(rng), pos(rng), vel(rng), vel(rng), ang(rng), vel(rng) * 5, t(rng)};
  for (int i = 0; i < kLimbs; ++i) {
    c.gait.amplitudes_deg[i] = amp(rng);
    c.gait.phases_deg[i] = ph(rng);
  }
  return c;
}

double kinetic_energy(const RobotState& s, const RobotParams& p) {
  return 0.5 * p.body_mass * (s.vx * s.vx + s.vy * s.vy) + 0.5 * p.rot_inertia * s.xi_dot * s.xi_dot;
}

}  // namespace

TEST_CASE("zero-angle contact geometry") {
  RobotParams p;
  const auto c = contact_kinematics({}, {}, p, 0.0);
  CHECK(c.position[0].x == doctest::Approx(0.125));
  CHECK(c.position[0].y == doctest::Approx(0.0));
  CHECK(c.hinge[0].x == doctest::Approx(0.05));
  for (int i = 0; i < kLimbs; ++i) CHECK(c.position[i].norm() == doctest::Approx(0.125));
}

TEST_CASE("contacts rotate with the body heading") {
  RobotParams p;
  const auto a = contact_kinematics({}, {}, p, 0.0);
  RobotState s;
  s.xi = deg_to_rad(120.0);
  const auto b = contact_kinematics(s, {}, p, 0.0);
  for (int i = 0; i < kLimbs; ++i) {
    const Vec2 expect = rot(a.position[i], 120.0);
    CHECK(b.position[i].x == doctest::Approx(expect.x).epsilon(1e-12));
    CHECK(b.position[i].y == doctest::Approx(expect.y).epsilon(1e-12));
    // limb i lands where limb i+1 was
    CHECK((b.position[i] - a.position[(i + 1) % kLimbs]).norm() < 1e-12);
  }
}

TEST_CASE("contact speed of a swinging limb is l*omega") {
  RobotParams p;
  GaitParams g;
  g.amplitudes_deg = {30.0, 0.0, 0.0};
  const double omega = deg_to_rad(30.0) * 2.0 * kPi;  // phi_dot at t = 0
  const auto c = contact_kinematics({}, g, p, 0.0);
  CHECK(c.phi_dot[0] == doctest::Approx(omega));
  CHECK(c.velocity[0].norm() == doctest::Approx(p.limb_length * omega).epsilon(1e-14));
  CHECK(c.velocity[0].x == doctest::Approx(0.0));
  CHECK(c.velocity[1].norm() == 0.0);
}

TEST_CASE("contact velocities match a finite difference of the positions") {
  RobotParams p;
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const auto rc = random_case(rng);
    const double h = 1e-6;
    auto at = [&](double dt) {
      RobotState s = rc.state;
      s.x += s.vx * dt;
      s.y += s.vy * dt;
      s.xi += s.xi_dot * dt;
      return contact_kinematics(s, rc.gait, p, rc.state.t + dt);
    };
    const auto c = at(0.0), plus = at(h), minus = at(-h);
    for (int i = 0; i < kLimbs; ++i) {
      const Vec2 fd = (plus.position[i] - minus.position[i]) * (0.5 / h);
      CHECK((fd - c.velocity[i]).norm() < 1e-7);
    }
  }
}

TEST_CASE("symmetric pose shares the weight equally") {
  RobotParams p;
  const auto n = solve_normal_forces(contact_kinematics({}, {}, p, 0.0), {}, p);
  for (double v : n.n) CHECK(v == doctest::Approx(0.888 * 9.81 / 3.0).epsilon(1e-12));
  CHECK(n.n[0] == doctest::Approx(2.904).epsilon(1e-3));
}

TEST_CASE("collinear contacts are rejected") {
  RobotParams p;
  ContactSet c;
  c.position = {Vec2{-0.1, 0.0}, Vec2{0.0, 0.0}, Vec2{0.1, 0.0}};
  CHECK_THROWS_AS(solve_normal_forces(c, {0.0, 0.0}, p), ContactDegenerate);
  c.position = {Vec2{-0.1, 0.0}, Vec2{0.0, 1e-15}, Vec2{0.1, 0.0}};
  CHECK_THROWS_AS(solve_normal_forces(c, {0.0, 0.0}, p), ContactDegenerate);
}

TEST_CASE("normal forces satisfy the force and torque balance") {
  RobotParams p;
  std::mt19937_64 rng(5);
  const double w = p.body_mass * p.gravity;
  for (int k = 0; k < 200; ++k) {
    const auto rc = random_case(rng);
    const auto c = contact_kinematics(rc.state, rc.gait, p, rc.state.t);
    const auto n = solve_normal_forces(c, rc.state.position(), p);
    CHECK(std::abs(n.sum() - w) <= 1e-9 * w);
    Vec2 moment;
    for (int i = 0; i < kLimbs; ++i) moment += (c.position[i] - rc.state.position()) * n.n[i];
    CHECK(moment.norm() <= 1e-9 * w * p.hinge_radius);
  }
}

TEST_CASE("friction examples") {
  RobotParams p;
  ContactSet c;
  NormalForces n{{2.904, 2.904, 2.904}};
  c.velocity = {Vec2{0.1, 0.0}, Vec2{0.0, 0.0}, Vec2{0.0, -3e-5}};
  const auto f = friction_forces(c, n, p);
  CHECK(f[0].x == doctest::Approx(-2.4684).epsilon(1e-9));
  CHECK(f[0].y == 0.0);
  CHECK(f[1].x == 0.0);
  CHECK(f[1].y == 0.0);
  // creep ramp: 0.3 of the full magnitude, still opposing the slip
  CHECK(f[2].y == doctest::Approx(0.85 * 2.904 * 0.3));
}

TEST_CASE("friction is continuous at the creep threshold and never exceeds mu N") {
  RobotParams p;
  NormalForces n{{2.0, 3.0, 4.0}};
  ContactSet c;
  c.velocity = {Vec2{p.creep_velocity * (1 - 1e-12), 0.0}, Vec2{0.0, p.creep_velocity}, Vec2{0.3, 0.4}};
  const auto f = friction_forces(c, n, p);
  CHECK(f[0].norm() == doctest::Approx(p.friction_mu * 2.0));
  CHECK(f[1].norm() == doctest::Approx(p.friction_mu * 3.0));
  CHECK(f[2].norm() == doctest::Approx(p.friction_mu * 4.0).epsilon(1e-14));

  std::mt19937_64 rng(9);
  std::normal_distribution<double> v(0.0, 1e-3);
  for (int k = 0; k < 1000; ++k) {
    ContactSet r;
    for (auto& x : r.velocity) x = {v(rng), v(rng)};
    const auto g = friction_forces(r, n, p);
    for (int i = 0; i < kLimbs; ++i) {
      CHECK(g[i].dot(r.velocity[i]) <= 0.0);
      CHECK(g[i].norm() <= p.friction_mu * n.n[i] * (1 + 1e-12));
    }
  }
}

TEST_CASE("drag force") {
  WindField w;
  const Vec2 f = drag_force(w);
  CHECK(f.norm() == doctest::Approx(0.364).epsilon(1e-3));
  CHECK(f.norm() == doctest::Approx(0.5 * 1.204 * 0.02 * 5.5 * 5.5).epsilon(1e-14));
  CHECK(f.y == 0.0);

  w.speed = 0.0;
  CHECK(drag_force(w).norm() == 0.0);

  w.speed = 2.0;
  const double f2 = drag_force(w).norm();
  w.speed = 4.0;
  CHECK(drag_force(w).norm() == doctest::Approx(4.0 * f2));

  w.direction_deg = 90.0;
  CHECK(drag_force(w).x == doctest::Approx(0.0));
  CHECK(drag_force(w).y > 0.0);
}

TEST_CASE("state derivative at rest") {
  RobotParams p;
  auto d = state_derivative({}, {}, std::nullopt, p);
  CHECK(d.dvx == 0.0);
  CHECK(d.dvy == 0.0);
  CHECK(d.dxi_dot == 0.0);

  WindField w;
  d = state_derivative({}, {}, w, p);
  CHECK(d.dvx == doctest::Approx(drag_force(w).x / p.body_mass).epsilon(1e-14));
  CHECK(d.dvy == 0.0);
  CHECK(d.dxi_dot == 0.0);
}

TEST_CASE("mirror symmetry of the equations of motion") {
  // Reflecting y -> -y maps limb 1 onto itself and swaps limbs 2 and 3.
  RobotParams p;
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    const auto rc = random_case(rng);
    RobotState m = rc.state;
    m.y = -m.y;
    m.vy = -m.vy;
    m.xi = -m.xi;
    m.xi_dot = -m.xi_dot;
    GaitParams g = rc.gait;
    g.amplitudes_deg = {-rc.gait.amplitudes_deg[0], -rc.gait.amplitudes_deg[2], -rc.gait.amplitudes_deg[1]};
    g.phases_deg = {rc.gait.phases_deg[0], rc.gait.phases_deg[2], rc.gait.phases_deg[1]};
    WindField w;
    w.direction_deg = 30.0;
    WindField wm = w;
    wm.direction_deg = -30.0;
    const auto a = state_derivative(rc.state, rc.gait, w, p);
    const auto b = state_derivative(m, g, wm, p);
    CHECK(b.dvx == doctest::Approx(a.dvx).epsilon(1e-9));
    CHECK(b.dvy == doctest::Approx(-a.dvy).epsilon(1e-9));
    CHECK(b.dxi_dot == doctest::Approx(-a.dxi_dot).epsilon(1e-9));
  }
}

TEST_CASE("zero gait at rest stays put") {
  RobotParams p;
  const auto seg = integrate({}, {}, std::nullopt, p, 2.0);
  CHECK(seg.samples.size() == 201);
  CHECK(seg.samples.front().state.t == 0.0);
  CHECK(seg.final_state.t == doctest::Approx(2.0));
  CHECK(seg.final_state.position().norm() == 0.0);
  CHECK(seg.final_state.xi == 0.0);
}

TEST_CASE("output grid is uniform") {
  RobotParams p;
  const auto seg = integrate({}, canonical_gait(CanonicalGait::translate_limb_1), std::nullopt, p, 1.0);
  for (std::size_t i = 0; i < seg.samples.size(); ++i) {
    CHECK(seg.samples[i].state.t == doctest::Approx(0.01 * static_cast<double>(i)).epsilon(1e-12));
  }
  CHECK(seg.negative_normal_samples == 0);
}

TEST_CASE("kinetic energy does not grow without actuation") {
  RobotParams p;
  RobotState s;
  s.vx = 0.3;
  s.vy = -0.1;
  s.xi_dot = 2.0;
  const auto seg = integrate(s, {}, std::nullopt, p, 1.0);
  double prev = kinetic_energy(s, p);
  for (const auto& smp : seg.samples) {
    const double e = kinetic_energy(smp.state, p);
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("120 degree equivariance of trajectories") {
  RobotParams p;
  IntegratorOptions tight;
  tight.rel_tol = 1e-11;
  tight.abs_tol = 1e-13;
  GaitParams g;
  g.amplitudes_deg = {12.0, 30.0, -30.0};
  g.phases_deg = {0.0, 20.0, 50.0};
  RobotState s0{0.1, -0.05, 0.0, 0.0, 0.3, 0.0, 0.0};
  const auto a = integrate(s0, g, std::nullopt, p, 5.0, tight);

  // Rotate the start about the origin and hand limb i's signal to limb i+1.
  RobotState s1 = s0;
  const Vec2 r = rot(s0.position(), 120.0);
  s1.x = r.x;
  s1.y = r.y;
  GaitParams g1;
  for (int i = 0; i < kLimbs; ++i) {
    g1.amplitudes_deg[(i + 1) % kLimbs] = g.amplitudes_deg[i];
    g1.phases_deg[(i + 1) % kLimbs] = g.phases_deg[i];
  }
  const auto b = integrate(s1, g1, std::nullopt, p, 5.0, tight);
  REQUIRE(a.samples.size() == b.samples.size());
  double worst = 0.0, worst_xi = 0.0;
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    worst = std::max(worst, (rot(a.samples[k].state.position(), 120.0) - b.samples[k].state.position()).norm());
    worst_xi = std::max(worst_xi, std::abs(a.samples[k].state.xi - b.samples[k].state.xi));
  }
  CHECK(worst < 1e-6);
  CHECK(worst_xi < 1e-6);
  CHECK(a.final_state.position().norm() > 0.01);
}

TEST_CASE("simulation is deterministic") {
  RobotParams p;
  const auto g = canonical_gait(CanonicalGait::rotate_cw);
  const auto a = integrate({}, g, WindField{}, p, 2.0);
  const auto b = integrate({}, g, WindField{}, p, 2.0);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) CHECK(a.samples[k].state == b.samples[k].state);
}

TEST_CASE("integrate rejects bad input") {
  RobotParams p;
  CHECK_THROWS_AS(integrate({}, {}, std::nullopt, p, 0.0), InvalidParams);
  GaitParams g;
  g.amplitudes_deg[0] = 45.0;
  CHECK_THROWS_AS(integrate({}, g, std::nullopt, p, 1.0), InvalidParams);
  IntegratorOptions o;
  o.min_step = 1.0;  // any real step underflows this
  o.rel_tol = 1e-14;
  o.abs_tol = 1e-16;
  CHECK_THROWS_AS(integrate({}, canonical_gait(CanonicalGait::rotate_cw), std::nullopt, p, 1.0, o), StepFailure);
}
