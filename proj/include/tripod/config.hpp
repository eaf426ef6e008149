#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "tripod/control.hpp"
#include "tripod/gait.hpp"
#include "tripod/harness.hpp"
#include "tripod/types.hpp"

// JSON (de)serialization of the public types. Angles are stored in degrees.
// Missing keys take their defaults; present keys with the wrong type or an
// invalid value raise ConfigInvalid naming the key path.
namespace tripod::config {

using Json = nlohmann::json;

Json to_json(const RobotParams& p);
Json to_json(const GaitParams& g);
Json to_json(const WindField& w);
Json to_json(const Path& p);
Json to_json(const PIController& c);
Json to_json(const GaitMap& m);
Json to_json(const Metrics& m);
Json to_json(const ScenarioConfig& c);

RobotParams robot_params_from_json(const Json& j, const std::string& where = "robot");
GaitParams gait_params_from_json(const Json& j, const std::string& where = "gait");
WindField wind_from_json(const Json& j, const std::string& where = "wind");
Path path_from_json(const Json& j, const std::string& where = "path");
PIController controller_from_json(const Json& j, const std::string& where = "controller");
GaitMap gait_map_from_json(const Json& j);
Metrics metrics_from_json(const Json& j);
//! Relative map_file entries resolve against base_dir.
ScenarioConfig scenario_from_json(const Json& j, const std::filesystem::path& base_dir = {});

Json read_json_file(const std::filesystem::path& file);
void write_json_file(const std::filesystem::path& file, const Json& j);

ScenarioConfig load_scenario(const std::filesystem::path& file);
GaitMap load_gait_map(const std::filesystem::path& file);
void save_gait_map(const std::filesystem::path& file, const GaitMap& map);

}  // namespace tripod::config
