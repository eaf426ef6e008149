#include "tripod/types.hpp"

namespace tripod {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidParams(what);
}

}  // namespace

const RobotParams& validate_params(const RobotParams& p) {
  require(std::isfinite(p.body_mass) && p.body_mass > 0.0, "non-positive mass");
  require(std::isfinite(p.rot_inertia) && p.rot_inertia > 0.0, "non-positive rotational inertia");
  require(std::isfinite(p.hinge_radius) && p.hinge_radius > 0.0, "non-positive hinge radius");
  require(std::isfinite(p.limb_length) && p.limb_length > 0.0, "non-positive limb length");
  require(std::isfinite(p.friction_mu) && p.friction_mu >= 0.0, "negative friction coefficient");
  require(std::isfinite(p.gravity) && p.gravity > 0.0, "non-positive gravity");
  require(std::isfinite(p.creep_velocity) && p.creep_velocity > 0.0, "non-positive creep velocity");
  return p;
}

const GaitParams& validate_gait(const GaitParams& g) {
  for (double a : g.amplitudes_deg) {
    require(std::isfinite(a) && std::abs(a) <= kMaxAmplitudeDeg, "amplitude exceeds 30 deg servo limit");
  }
  for (double psi : g.phases_deg) require(std::isfinite(psi), "non-finite phase");
  require(std::isfinite(g.frequency_hz) && g.frequency_hz > 0.0, "non-positive frequency");
  return g;
}

const WindField& validate_wind(const WindField& w) {
  require(std::isfinite(w.speed) && w.speed >= 0.0, "negative wind speed");
  require(std::isfinite(w.direction_deg), "non-finite wind direction");
  require(std::isfinite(w.air_density) && w.air_density > 0.0, "non-positive air density");
  require(std::isfinite(w.drag_coeff) && w.drag_coeff >= 0.0, "negative drag coefficient");
  require(std::isfinite(w.frontal_area) && w.frontal_area >= 0.0, "negative frontal area");
  return w;
}

}  // namespace tripod
