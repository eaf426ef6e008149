#include "tripod/gait.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "tripod/dynamics.hpp"

namespace tripod {

LimbAngle limb_angle(const GaitParams& gait, int limb, double t) {
  const double amplitude = deg_to_rad(gait.amplitudes_deg[limb]);
  const double omega = 2.0 * kPi * gait.frequency_hz;
  const double psi = deg_to_rad(gait.phases_deg[limb]);
  // Expanded form keeps the carrier sin/cos shared across limbs in the integrator.
  const double sw = std::sin(omega * t), cw = std::cos(omega * t);
  const double sp = psi == 0.0 ? 0.0 : std::sin(psi), cp = psi == 0.0 ? 1.0 : std::cos(psi);
  return {amplitude * (sw * cp + cw * sp), amplitude * omega * (cw * cp - sw * sp)};
}

GaitParams canonical_gait(CanonicalGait kind) {
  GaitParams g;
  switch (kind) {
    case CanonicalGait::translate_limb_1:
      g.amplitudes_deg = {0.0, 30.0, -30.0};
      break;
    case CanonicalGait::translate_limb_2:
      g.amplitudes_deg = {-30.0, 0.0, 30.0};
      break;
    case CanonicalGait::translate_limb_3:
      g.amplitudes_deg = {30.0, -30.0, 0.0};
      break;
    case CanonicalGait::rotate_ccw:
      g.amplitudes_deg = {30.0, 30.0, 30.0};
      g.phases_deg = {0.0, -120.0, -240.0};
      break;
    case CanonicalGait::rotate_cw:
      g.amplitudes_deg = {30.0, 30.0, 30.0};
      g.phases_deg = {0.0, 120.0, 240.0};
      break;
  }
  return g;
}

std::optional<CanonicalGait> parse_canonical_gait(const std::string& name) {
  for (auto kind : {CanonicalGait::translate_limb_1, CanonicalGait::translate_limb_2,
                    CanonicalGait::translate_limb_3, CanonicalGait::rotate_cw, CanonicalGait::rotate_ccw}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string to_string(CanonicalGait kind) {
  switch (kind) {
    case CanonicalGait::translate_limb_1: return "translate_limb_1";
    case CanonicalGait::translate_limb_2: return "translate_limb_2";
    case CanonicalGait::translate_limb_3: return "translate_limb_3";
    case CanonicalGait::rotate_cw: return "rotate_cw";
    case CanonicalGait::rotate_ccw: return "rotate_ccw";
  }
  return "unknown";
}

std::array<double, kLimbs> Zone::amplitudes(double alpha_deg) const {
  auto a = fixed_deg;
  a[alpha_limb] = alpha_sign * alpha_deg;
  return a;
}

const std::array<Zone, 6>& zone_table() {
  static const std::array<Zone, 6> table{{
      {1, 0.0, 0, 1.0, {0.0, 30.0, -30.0}},
      {2, 60.0, 1, -1.0, {-30.0, 0.0, 30.0}},
      {3, 120.0, 1, 1.0, {-30.0, 0.0, 30.0}},
      {4, 180.0, 2, -1.0, {30.0, -30.0, 0.0}},
      {5, 240.0, 2, 1.0, {30.0, -30.0, 0.0}},
      {6, 300.0, 0, -1.0, {0.0, 30.0, -30.0}},
  }};
  return table;
}

const Zone& zone_select(double theta_deg) {
  const double w = wrap_deg(theta_deg);
  // (L, L + 60] -> index ceil(w / 60) - 1
  int idx = static_cast<int>(std::ceil(w / 60.0)) - 1;
  idx = std::clamp(idx, 0, 5);
  return zone_table()[static_cast<size_t>(idx)];
}

double circular_mean_deg(const std::vector<double>& angles_deg) {
  double s = 0.0, c = 0.0;
  for (double a : angles_deg) {
    s += std::sin(deg_to_rad(a));
    c += std::cos(deg_to_rad(a));
  }
  return rad_to_deg(std::atan2(s, c));
}

std::vector<double> cycle_headings_deg(const RobotParams& params, const GaitParams& gait, int cycles) {
  const double period = 1.0 / gait.frequency_hz;
  IntegratorOptions opt;
  opt.output_interval = period;
  opt.max_step = period / 20.0;
  const Segment seg = integrate(RobotState{}, gait, std::nullopt, params, cycles * period, opt);

  std::vector<double> headings;
  headings.reserve(static_cast<size_t>(cycles));
  for (size_t k = 0; k + 1 < seg.samples.size(); ++k) {
    const RobotState& a = seg.samples[k].state;
    const RobotState& b = seg.samples[k + 1].state;
    const double world = std::atan2(b.y - a.y, b.x - a.x);
    // Body-frame heading relative to limb 1 at cycle start, in (-180, 180].
    headings.push_back(rad_to_deg(std::remainder(world - a.xi, 2.0 * kPi)));
  }
  return headings;
}

namespace {

struct HeadingStats {
  double mean = 0.0;
  double stddev = 0.0;
};

HeadingStats averaged_heading(const RobotParams& params, double alpha_deg, int cycles, int discard) {
  GaitParams g;
  g.amplitudes_deg = zone_table()[0].amplitudes(alpha_deg);
  const auto all = cycle_headings_deg(params, g, cycles);
  const std::vector<double> kept(all.begin() + std::min<long>(discard, static_cast<long>(all.size())), all.end());
  HeadingStats st;
  st.mean = circular_mean_deg(kept);
  double ss = 0.0;
  for (double a : kept) {
    const double d = std::remainder(a - st.mean, 360.0);
    ss += d * d;
  }
  st.stddev = kept.size() > 1 ? std::sqrt(ss / static_cast<double>(kept.size() - 1)) : 0.0;
  return st;
}

// Zone-local argument for the map lookup.
double zone_local_deg(const GaitMap& map, const Zone& zone, double theta_wrapped) {
  const double local = theta_wrapped - zone.lower_deg;
  return map.reversed[static_cast<size_t>(zone.id - 1)] ? 60.0 - local : local;
}

}  // namespace

GaitMap build_gait_map(const RobotParams& params, const GaitMapOptions& options) {
  validate_params(params);
  if (options.cycles < 4) throw InvalidParams("gait map needs at least 4 cycles");
  if (options.mu_list.empty()) throw InvalidParams("empty friction list");
  if (options.discard_cycles < 0 || options.discard_cycles >= options.cycles) {
    throw InvalidParams("discard_cycles must leave at least one cycle");
  }
  std::vector<double> grid = options.alpha_grid_deg;
  if (grid.empty()) {
    for (int a = 0; a <= 30; ++a) grid.push_back(a);
  }
  if (grid.size() < 2) throw InvalidParams("alpha grid needs at least two points");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || grid[i] > kMaxAmplitudeDeg) throw InvalidParams("alpha grid outside [0, 30]");
    if (i > 0 && grid[i] <= grid[i - 1]) throw InvalidParams("alpha grid not increasing");
  }

  GaitMap map;
  map.cycles = options.cycles;
  const size_t n_mu = options.mu_list.size();
  std::vector<RobotParams> per_mu_params(n_mu, params);
  for (size_t m = 0; m < n_mu; ++m) {
    per_mu_params[m].friction_mu = options.mu_list[m];
    validate_params(per_mu_params[m]);
  }

  // Grid points are independent simulations; results land in fixed slots.
  std::vector<HeadingStats> stats(n_mu * grid.size());
  std::vector<std::exception_ptr> errors(stats.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t task = next++; task < stats.size(); task = next++) {
      try {
        stats[task] = averaged_heading(per_mu_params[task / grid.size()], grid[task % grid.size()],
                                       options.cycles, options.discard_cycles);
      } catch (...) {
        errors[task] = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t n_threads = std::min<size_t>(options.threads > 0 ? options.threads : hw, stats.size());
  std::vector<std::thread> pool;
  for (size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (size_t m = 0; m < n_mu; ++m) {
    GaitMap::Series series{options.mu_list[m], {}};
    for (size_t a = 0; a < grid.size(); ++a) {
      const auto& st = stats[m * grid.size() + a];
      series.samples.push_back({grid[a], st.mean, st.stddev});
    }
    for (size_t i = 1; i < series.samples.size(); ++i) {
      if (!(series.samples[i].theta_avg_deg > series.samples[i - 1].theta_avg_deg)) {
        throw MapNotMonotone("theta_avg not increasing in alpha at mu = " + std::to_string(series.mu) +
                             ", alpha = " + std::to_string(series.samples[i].alpha_deg));
      }
    }
    map.per_mu.push_back(std::move(series));
  }

  for (size_t j = 0; j < grid.size(); ++j) {
    double theta = 0.0;
    for (const auto& s : map.per_mu) theta += s.samples[j].theta_avg_deg;
    map.nodes.push_back({theta / static_cast<double>(map.per_mu.size()), grid[j]});
  }

  // Orientation check: a pure translation gait has to head along +limb-1.
  if (std::abs(map.nodes.front().theta_deg) >= 60.0) {
    throw MapNotMonotone("alpha = 0 heading falls outside zone 1; limb angle sign convention broken");
  }

  if (options.resolve_orientation) {
    RobotParams p = params;
    p.friction_mu = options.mu_list[options.mu_list.size() / 2];
    for (const Zone& zone : zone_table()) {
      const double target = zone.lower_deg + 20.0;
      double best_err = 1e300;
      bool best_reversed = false;
      for (bool reversed : {false, true}) {
        map.reversed[static_cast<size_t>(zone.id - 1)] = reversed;
        GaitParams g;
        g.amplitudes_deg = zone.amplitudes(map_lookup(map, zone_local_deg(map, zone, target)).alpha_deg);
        const auto h = cycle_headings_deg(p, g, options.discard_cycles + options.orientation_cycles);
        const std::vector<double> kept(h.begin() + options.discard_cycles, h.end());
        const double err = std::abs(std::remainder(circular_mean_deg(kept) - target, 360.0));
        if (err < best_err) {
          best_err = err;
          best_reversed = reversed;
        }
      }
      map.reversed[static_cast<size_t>(zone.id - 1)] = best_reversed;
    }
  }
  return map;
}

MapLookup map_lookup(const GaitMap& map, double theta_zone_deg) {
  const auto& nodes = map.nodes;
  if (nodes.empty()) throw InvalidParams("empty gait map");
  if (theta_zone_deg <= nodes.front().theta_deg) {
    return {std::clamp(nodes.front().alpha_deg, 0.0, 30.0), theta_zone_deg < nodes.front().theta_deg};
  }
  if (theta_zone_deg >= nodes.back().theta_deg) {
    return {std::clamp(nodes.back().alpha_deg, 0.0, 30.0), theta_zone_deg > nodes.back().theta_deg};
  }
  const auto hi = std::upper_bound(nodes.begin(), nodes.end(), theta_zone_deg,
                                   [](double v, const GaitMap::Node& n) { return v < n.theta_deg; });
  const auto lo = hi - 1;
  if (lo->theta_deg == theta_zone_deg) return {lo->alpha_deg, false};
  const double w = (theta_zone_deg - lo->theta_deg) / (hi->theta_deg - lo->theta_deg);
  return {lo->alpha_deg + w * (hi->alpha_deg - lo->alpha_deg), false};
}

HeadingGait select_gait(const GaitMap& map, double theta_body_deg) {
  const double theta = wrap_deg(theta_body_deg);
  const Zone& zone = zone_select(theta);
  const MapLookup lk = map_lookup(map, zone_local_deg(map, zone, theta));
  HeadingGait out;
  out.gait.amplitudes_deg = zone.amplitudes(lk.alpha_deg);
  out.zone = zone.id;
  out.alpha_deg = lk.alpha_deg;
  out.clamped = lk.clamped;
  return out;
}

GaitParams gait_for_heading(const GaitMap& map, double theta_body_deg) {
  return select_gait(map, theta_body_deg).gait;
}

}  // namespace tripod
