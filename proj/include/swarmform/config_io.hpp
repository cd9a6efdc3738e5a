#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "swarmform/scenario.hpp"

namespace swarmform {

/// Maps a JSON document onto a ScenarioConfig, starting from defaults.
/// Unknown keys, wrong types and invariant violations raise ConfigError
/// naming the dotted key.
ScenarioConfig config_from_json(std::string_view text,
                                const std::vector<std::string>& overrides = {});

/// Reads `path`, applies `KEY=VALUE` overrides (dotted keys, VALUE parsed as
/// JSON when possible, else taken as a string), then validates.
ScenarioConfig parse_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides = {});

/// Full config, every field explicit. Round-trips through config_from_json.
std::string config_to_json(const ScenarioConfig& cfg, int indent = 2);

}  // namespace swarmform
