#pragma once

// Run configuration: built-in defaults, then a flat key=value file, then
// command-line overrides. Keys mirror the long flag names.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "firmsim/market.hpp"

namespace firmsim {

/// Configuration error. Derives from InvalidParameter so every error names
/// the offending key.
class ConfigError : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

struct RunConfig {
  std::string scenario = "custom";
  SimParams params;
  std::size_t replicas = 400;
  std::filesystem::path out = ".";
  bool events = false;
  unsigned threads = 0;
  /// Keys set by the file or by overrides (not left at their defaults).
  std::set<std::string> explicit_keys;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Every key accepted in a config file or as an override.
const std::vector<std::string>& config_keys();

/// Parses key=value lines. Blank lines and lines starting with '#' are
/// skipped; a repeated key keeps its last value.
KeyValues parse_key_values(const std::string& text, const std::string& origin = "config");

/// Applies one key to `config`. Throws ConfigError for unknown keys or
/// malformed values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Defaults < file (if given) < overrides, then validation.
RunConfig load_config(const std::optional<std::filesystem::path>& file, const KeyValues& overrides = {});

void validate(const RunConfig& config);

}  // namespace firmsim
