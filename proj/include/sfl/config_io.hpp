#pragma once

#include <string>

#include "json.hpp"
#include "sfl/model.hpp"

namespace sfl {

using json = nlohmann::json;

// Parse a config document. Missing or mistyped fields raise ConfigError naming the field.
Config config_from_json(const json& j);
json config_to_json(const Config& c);

// Reads and parses a file; parse errors report the line number.
Config load_config(const std::string& path);
void save_config(const std::string& path, const Config& c);

}  // namespace sfl
