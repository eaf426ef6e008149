#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "tripod/types.hpp"

namespace tripod {

struct LimbAngle {
  double phi = 0.0;      // rad
  double phi_dot = 0.0;  // rad/s
};

//! Angle and rate of limb `limb` (0-based) at time t.
LimbAngle limb_angle(const GaitParams& gait, int limb, double t);

enum class CanonicalGait { translate_limb_1, translate_limb_2, translate_limb_3, rotate_cw, rotate_ccw };

GaitParams canonical_gait(CanonicalGait kind);
std::optional<CanonicalGait> parse_canonical_gait(const std::string& name);
std::string to_string(CanonicalGait kind);

//! One row of the six-zone omnidirectional gait table.
struct Zone {
  int id = 1;
  double lower_deg = 0.0;  // interval is (lower, lower + 60]
  //! Which limb carries alpha, and with which sign.
  int alpha_limb = 0;
  double alpha_sign = 1.0;
  //! Fixed amplitudes for all limbs; the alpha limb entry is ignored.
  std::array<double, kLimbs> fixed_deg{};

  std::array<double, kLimbs> amplitudes(double alpha_deg) const;
};

const std::array<Zone, 6>& zone_table();

//! Zone containing heading theta after wrapping into (0, 360].
const Zone& zone_select(double theta_deg);

//! Averaged alpha <-> theta relation for the zone-1 template [alpha, 30, -30].
struct GaitMap {
  static constexpr int kVersion = 1;

  struct Sample {
    double alpha_deg = 0.0;
    double theta_avg_deg = 0.0;
    //! Per-cycle heading standard deviation over the averaged cycles.
    double theta_std_deg = 0.0;
    bool operator==(const Sample&) const = default;
  };
  struct Series {
    double mu = 0.0;
    std::vector<Sample> samples;
    bool operator==(const Series&) const = default;
  };
  struct Node {
    double theta_deg = 0.0;
    double alpha_deg = 0.0;
    bool operator==(const Node&) const = default;
  };

  std::vector<Series> per_mu;
  //! M_avg nodes, sorted by theta.
  std::vector<Node> nodes;
  //! true where the zone-local angle runs backwards across the zone (index = zone id - 1).
  std::array<bool, 6> reversed{false, true, false, true, false, true};
  int cycles = 10;

  bool operator==(const GaitMap&) const = default;
};

struct MapLookup {
  double alpha_deg = 0.0;
  bool clamped = false;
};

struct GaitMapOptions {
  std::vector<double> mu_list{0.33, 0.59, 0.87};
  std::vector<double> alpha_grid_deg;  // empty means 0:1:30
  int cycles = 10;
  //! Cycles excluded from the heading average.
  int discard_cycles = 2;
  //! Empirically resolve the within-zone direction of every zone.
  bool resolve_orientation = true;
  //! Averaged cycles per orientation trial.
  int orientation_cycles = 2;
  //! Worker threads for the sweep; 0 uses the hardware concurrency.
  int threads = 0;
};

//! Per-cycle body-frame translation headings of a gait simulated from rest.
std::vector<double> cycle_headings_deg(const RobotParams& params, const GaitParams& gait, int cycles);

//! Mean heading (deg) of a set of angles, computed on the unit circle.
double circular_mean_deg(const std::vector<double>& angles_deg);

GaitMap build_gait_map(const RobotParams& params, const GaitMapOptions& options = {});

MapLookup map_lookup(const GaitMap& map, double theta_zone_deg);

struct HeadingGait {
  GaitParams gait;
  int zone = 1;
  double alpha_deg = 0.0;
  bool clamped = false;
};

//! Full gait selection for a body-frame heading.
HeadingGait select_gait(const GaitMap& map, double theta_body_deg);

GaitParams gait_for_heading(const GaitMap& map, double theta_body_deg);

}  // namespace tripod
