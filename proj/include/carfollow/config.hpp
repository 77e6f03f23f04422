#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carfollow/controller.hpp"
#include "carfollow/plant.hpp"
#include "carfollow/sim.hpp"

namespace carfollow::io {

/// Scenario fields a configuration file may override (`scenario.*` keys).
struct ScenarioOverrides {
    std::optional<std::string> base;
    std::optional<std::string> name;
    std::optional<double> h;
    std::optional<double> v_F;
    std::optional<double> a_F;
    std::optional<double> T;
    std::optional<std::string> lead_kind;
    std::optional<double> lead_v0;
    std::optional<double> lead_decel;
    std::optional<double> lead_amp;
    std::optional<double> lead_f;
    std::optional<std::vector<std::pair<double, double>>> lead_table;
    std::optional<plant::PlantKind> plant;
    std::optional<control::ControllerKind> controller;
    std::optional<control::RangePolicy> range_policy;
    std::optional<plant::DisturbanceKind> disturbance_kind;
    std::optional<double> disturbance_value;
    std::optional<bool> integral;
    std::optional<double> duration;
    std::optional<double> dt;
};

/// Flat `key = value [unit]` configuration. `#` starts a comment; unknown
/// keys and mismatched units are rejected.
struct Config {
    control::ControllerParams params;
    plant::PhysicsParams physics;
    ScenarioOverrides scenario;
};

[[nodiscard]] Config parse_config(std::istream& in, const std::string& source = "<config>");
[[nodiscard]] Config load_config(const std::filesystem::path& path);

/// Writes every controller and physics key with its unit.
void write_config(std::ostream& out, const Config& cfg);

/// Builds the scenario to simulate. `base_name` (from the command line)
/// takes precedence over `scenario.base`; with neither, starts from an
/// equilibrium run behind a 20 m/s predecessor.
[[nodiscard]] sim::Scenario resolve_scenario(const Config& cfg, const std::optional<std::string>& base_name);

/// Documented keys with their units, in file order.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> config_keys();

}  // namespace carfollow::io
