#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tripod/control.hpp"
#include "tripod/dynamics.hpp"
#include "tripod/gait.hpp"
#include "tripod/types.hpp"

namespace tripod {

// --- friction calibration -------------------------------------------------

struct CalibrationInput {
  double mass = 0.1;       // kg
  double slope_deg = 30.0;
  double travel = 0.5;     // m
  double final_speed = 0.0;  // m/s
  double gravity = 9.81;
};

//! Kinetic friction coefficient from a ramp slide: energy lost to friction over
//! the normal-force work. Throws NonPhysical if the slide gained more kinetic
//! energy than the potential energy released.
double calibrate_friction(const CalibrationInput& input);

// --- scenarios --------------------------------------------------------------

struct ClosedLoopSource {
  Path path;
  PIController controller;
  std::string map_file;
  //! Used instead of map_file when set.
  std::optional<GaitMap> map;
  double heading_bias_deg = 0.0;
};

using GaitSource = std::variant<GaitParams, CanonicalGait, ClosedLoopSource>;

struct ScenarioConfig {
  std::string name = "scenario";
  RobotParams robot;
  GaitSource gait = GaitParams{};
  std::optional<WindField> wind;
  double duration = 5.0;  // s, open loop
  int max_cycles = 200;   // closed loop
  //! Pose at t = 0; closed-loop runs default to the first waypoint.
  std::optional<RobotState> initial_state;
  std::string output_dir;
  //! Reserved; the simulation core is deterministic.
  unsigned seed = 0;
  IntegratorOptions integrator;
};

bool is_closed_loop(const ScenarioConfig& config);

//! Throws ConfigInvalid with the offending field name.
void validate_scenario(const ScenarioConfig& config);

//! One row of the trace CSV. Control columns are set on rows where the
//! controller ran (closed loop only).
struct TraceRow {
  Sample sample;
  std::optional<ControlDiagnostics> control;
};

struct SegmentStats {
  std::size_t segment = 0;
  int samples = 0;
  double sum_abs_e = 0.0;  // m
  double max_abs_e = 0.0;  // m
  double mean_abs_e() const { return samples > 0 ? sum_abs_e / samples : 0.0; }
  bool operator==(const SegmentStats&) const = default;
};

struct Metrics {
  double delta = 0.0;                 // m, sum of |e| over control cycles
  std::optional<double> completion_time;  // s
  double max_abs_e = 0.0;             // m
  int cycles = 0;
  std::vector<SegmentStats> per_segment;

  bool completed() const { return completion_time.has_value(); }
  bool operator==(const Metrics&) const = default;
};

struct ScenarioResult {
  std::vector<TraceRow> trace;
  Metrics metrics;
  std::optional<Path> path;
  long negative_normal_samples = 0;
};

//! Runs an open-loop or closed-loop scenario. Closed-loop runs use the map
//! embedded in the config, or load it from map_file.
ScenarioResult run_scenario(const ScenarioConfig& config);

//! Replays waypoint capture over the control rows of a trace.
Metrics recompute_metrics(const std::vector<TraceRow>& trace, const Path& path);

// --- trace files ------------------------------------------------------------

inline constexpr const char* kTraceHeader =
    "t,x,y,xi,vx,vy,xidot,phi1,phi2,phi3,N1,N2,N3,e,theta_D,theta_PI,zone,alpha";

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);
std::vector<TraceRow> read_trace_csv(std::istream& in);
void save_trace(const std::filesystem::path& file, const std::vector<TraceRow>& trace);
std::vector<TraceRow> load_trace(const std::filesystem::path& file);

//! Writes trace.csv and metrics.json into dir.
void write_scenario_outputs(const std::filesystem::path& dir, const ScenarioConfig& config,
                            const ScenarioResult& result);

// --- comparisons -------------------------------------------------------------

struct RunRecord {
  std::string label;
  std::vector<TraceRow> trace;
  Metrics metrics;
  std::optional<Path> path;
};

//! Loads trace.csv and metrics.json from a scenario output directory.
RunRecord load_run(const std::filesystem::path& dir);

struct SegmentComparison {
  std::size_t segment = 0;
  SegmentStats a;
  SegmentStats b;
};

struct ComparisonReport {
  std::string label_a;
  std::string label_b;
  Metrics a;
  Metrics b;
  double delta_change = 0.0;       // b - a, m
  double delta_reduction = 0.0;    // 1 - b/a
  std::optional<double> completion_change;
  double max_abs_e_change = 0.0;
  std::vector<SegmentComparison> segments;
};

//! Side-by-side metrics of two runs over the same path. Throws PathMismatch.
ComparisonReport compare_runs(const RunRecord& a, const RunRecord& b);

void print_report(std::ostream& out, const ComparisonReport& report);

//! Flow condition x control mode grid of cumulative error and completion time.
struct SummaryTable {
  std::vector<std::string> flows;  // column groups
  std::array<std::string, 2> controls{"No PI", "With PI"};
  //! cells[control][flow]
  std::array<std::vector<Metrics>, 2> cells;
};

//! Builds the table from runs listed as (no-PI, PI) pairs per flow condition.
SummaryTable summarize(const std::vector<std::string>& flows, const std::vector<RunRecord>& runs);

void print_table(std::ostream& out, const SummaryTable& table);

}  // namespace tripod
