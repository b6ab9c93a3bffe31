#pragma once

#include "haechi/sim/scenario.hpp"

#include <filesystem>
#include <string>

namespace haechi {

/// Parses a TOML scenario. Syntax and schema problems raise ConfigError
/// with the key path (and line for syntax errors). Does not call validate().
Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace haechi
