// Command-line front end: simulate, gaitmap, follow, calibrate, compare.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tripod/config.hpp"
#include "tripod/harness.hpp"

namespace fs = std::filesystem;
using namespace tripod;

namespace {

std::optional<WindField> parse_wind(const std::string& spec) {
  if (spec.empty()) return std::nullopt;
  WindField w;
  char comma = 0;
  std::istringstream is(spec);
  if (!(is >> w.speed >> comma >> w.direction_deg) || comma != ',' || !is.eof()) {
    throw ConfigInvalid("--wind: expected <speed,direction_deg>, got '" + spec + "'");
  }
  validate_wind(w);
  return w;
}

ScenarioConfig load_or_default(const std::string& file) {
  if (file.empty()) {
    ScenarioConfig c;
    c.gait = CanonicalGait::translate_limb_1;
    return c;
  }
  return config::load_scenario(file);
}

void report_run(const ScenarioConfig& c, const ScenarioResult& r, const fs::path& out) {
  const auto& s = r.trace.back().sample.state;
  std::cout << c.name << ": t = " << s.t << " s, x = " << s.x << " m, y = " << s.y
            << " m, xi = " << rad_to_deg(s.xi) << " deg\n";
  if (r.path) {
    std::cout << "  Delta = " << r.metrics.delta << " m, max |e| = " << r.metrics.max_abs_e
              << " m, cycles = " << r.metrics.cycles << ", T_c = ";
    if (r.metrics.completion_time) {
      std::cout << *r.metrics.completion_time << " s\n";
    } else {
      std::cout << "(not completed)\n";
    }
  }
  if (r.negative_normal_samples > 0) {
    std::cout << "  warning: " << r.negative_normal_samples << " samples with a negative normal force\n";
  }
  if (!out.empty()) std::cout << "  wrote " << (out / "trace.csv").string() << " and metrics.json\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tripedal friction-driven robot: simulation, gait map and path following"};
  app.require_subcommand(1);

  std::string config_file, out_dir, map_file, wind_spec;
  bool no_pi = false;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Open-loop gait simulation");
  std::string canonical;
  double duration = 0.0;
  sim->add_option("--config", config_file, "Scenario config (JSON)")->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "Output directory for trace.csv and metrics.json");
  sim->add_option("--wind", wind_spec, "Uniform wind <speed,direction_deg>");
  sim->add_option("--gait", canonical,
                  "Canonical gait: translate_limb_1|translate_limb_2|translate_limb_3|rotate_cw|rotate_ccw");
  sim->add_option("--duration", duration, "Override duration [s]");

  // gaitmap
  auto* gm = app.add_subcommand("gaitmap", "Build the averaged alpha/theta gait map");
  std::vector<double> mu_list{0.33, 0.59, 0.87};
  double alpha_step = 1.0;
  int cycles = 10;
  int threads = 0;
  std::string gm_out = "gaitmap.json";
  gm->add_option("--config", config_file, "Scenario config supplying robot parameters")->check(CLI::ExistingFile);
  gm->add_option("--out,--map", gm_out, "Gait map file to write")->capture_default_str();
  gm->add_option("--mu", mu_list, "Friction coefficients")->capture_default_str();
  gm->add_option("--alpha-step", alpha_step, "Alpha grid step [deg]")->check(CLI::Range(0.1, 30.0));
  gm->add_option("--cycles", cycles, "Cycles per simulation")->check(CLI::Range(4, 1000));
  gm->add_option("--threads", threads, "Worker threads (0 = all cores)");

  // follow
  auto* fol = app.add_subcommand("follow", "Closed-loop path following");
  double bias = std::numeric_limits<double>::quiet_NaN();
  fol->add_option("--config", config_file, "Scenario config with a closed_loop section")
      ->required()
      ->check(CLI::ExistingFile);
  fol->add_option("--out", out_dir, "Output directory");
  fol->add_option("--map", map_file, "Gait map file (overrides config)");
  fol->add_flag("--no-pi", no_pi, "Zero both controller gains");
  fol->add_option("--wind", wind_spec, "Uniform wind <speed,direction_deg>");
  fol->add_option("--bias", bias, "Heading bias added before gait selection [deg]");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Friction coefficient from a ramp slide");
  CalibrationInput ci;
  cal->add_option("--mass", ci.mass, "Sliding mass [kg]")->required();
  cal->add_option("--slope", ci.slope_deg, "Ramp angle [deg]")->required();
  cal->add_option("--travel", ci.travel, "Distance travelled down the ramp [m]")->required();
  cal->add_option("--speed", ci.final_speed, "Speed after the travel [m/s]")->required();

  // compare
  auto* cmp = app.add_subcommand("compare", "Compare scenario runs");
  std::vector<std::string> run_dirs;
  std::vector<std::string> flows;
  cmp->add_option("runs", run_dirs, "Run directories: A B, or (no-PI, PI) pairs per flow with --flows")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmp->add_option("--flows", flows, "Flow labels; switches to the summary-table layout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      ScenarioConfig c = load_or_default(config_file);
      if (!canonical.empty()) {
        const auto kind = parse_canonical_gait(canonical);
        if (!kind) throw ConfigInvalid("--gait: unknown canonical gait '" + canonical + "'");
        c.gait = *kind;
      }
      if (is_closed_loop(c)) throw ConfigInvalid("simulate needs an open-loop gait; use follow");
      if (duration > 0.0) c.duration = duration;
      if (!wind_spec.empty()) c.wind = parse_wind(wind_spec);
      if (!out_dir.empty()) c.output_dir = out_dir;
      const auto r = run_scenario(c);
      if (!c.output_dir.empty()) write_scenario_outputs(c.output_dir, c, r);
      report_run(c, r, c.output_dir);
    } else if (*gm) {
      const RobotParams robot = config_file.empty() ? RobotParams{} : config::load_scenario(config_file).robot;
      GaitMapOptions opt;
      opt.mu_list = mu_list;
      opt.cycles = cycles;
      opt.threads = threads;
      for (double a = 0.0; a <= 30.0 + 1e-9; a += alpha_step) opt.alpha_grid_deg.push_back(std::min(a, 30.0));
      const auto t0 = std::chrono::steady_clock::now();
      const GaitMap map = build_gait_map(robot, opt);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      config::save_gait_map(gm_out, map);
      std::cout << "gait map: " << map.nodes.size() << " nodes over mu = {";
      for (size_t i = 0; i < mu_list.size(); ++i) std::cout << (i ? ", " : "") << mu_list[i];
      std::cout << "}, theta range [" << map.nodes.front().theta_deg << ", " << map.nodes.back().theta_deg
                << "] deg, built in " << secs << " s -> " << gm_out << '\n';
    } else if (*fol) {
      ScenarioConfig c = config::load_scenario(config_file);
      auto* loop = std::get_if<ClosedLoopSource>(&c.gait);
      if (!loop) throw ConfigInvalid("follow needs a closed_loop section in " + config_file);
      if (!map_file.empty()) loop->map_file = map_file;
      if (no_pi) {
        loop->controller.kp = 0.0;
        loop->controller.ki = 0.0;
        c.name += "_no_pi";
      }
      if (!std::isnan(bias)) loop->heading_bias_deg = bias;
      if (!wind_spec.empty()) c.wind = parse_wind(wind_spec);
      if (!out_dir.empty()) c.output_dir = out_dir;
      const auto r = run_scenario(c);
      if (!c.output_dir.empty()) write_scenario_outputs(c.output_dir, c, r);
      report_run(c, r, c.output_dir);
    } else if (*cal) {
      std::cout << "mu = " << calibrate_friction(ci) << '\n';
    } else if (*cmp) {
      std::vector<RunRecord> runs;
      for (const auto& d : run_dirs) runs.push_back(load_run(d));
      if (flows.empty()) {
        if (runs.size() != 2) throw ConfigInvalid("compare expects exactly two run directories");
        print_report(std::cout, compare_runs(runs[0], runs[1]));
      } else {
        print_table(std::cout, summarize(flows, runs));
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
