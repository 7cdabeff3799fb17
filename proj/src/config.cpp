#include "firmsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace firmsim {

namespace {

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_real(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (value.empty() || end != begin + value.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError(key, "expected a real number, got '" + value + "'");
  return v;
}

template <typename Int>
Int to_integer(const std::string& key, const std::string& value) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError(key, "expected an integer, got '" + value + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError(key, "expected a boolean, got '" + value + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "scenario", "q",  "policy", "variant", "replicas", "tmax", "seed",    "lx",  "ly",
      "c",        "sigma", "s",   "b",       "nmin",     "omega-s", "out", "events", "threads",
  };
  return keys;
}

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno), "expected key=value, got '" + stripped + "'");
    out.emplace_back(trim(std::string_view(stripped).substr(0, eq)),
                     trim(std::string_view(stripped).substr(eq + 1)));
  }
  return out;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  SimParams& p = config.params;
  if (key == "scenario") {
    config.scenario = value;
  } else if (key == "q") {
    p.q = to_real(key, value);
  } else if (key == "policy") {
    const auto policy = parse_policy(value);
    if (!policy) throw ConfigError(key, "unknown policy '" + value + "' (egalitarian, low, medium, high)");
    p.policy = *policy;
  } else if (key == "variant") {
    const auto variant = parse_variant(value);
    if (!variant) throw ConfigError(key, "unknown variant '" + value + "' (passive, active)");
    p.variant = *variant;
  } else if (key == "replicas") {
    config.replicas = to_integer<std::size_t>(key, value);
  } else if (key == "tmax") {
    p.t_max = to_integer<int>(key, value);
  } else if (key == "seed") {
    p.seed = to_integer<std::uint64_t>(key, value);
  } else if (key == "lx") {
    p.lx = to_integer<int>(key, value);
  } else if (key == "ly") {
    p.ly = to_integer<int>(key, value);
  } else if (key == "c") {
    p.c = to_real(key, value);
  } else if (key == "sigma") {
    p.sigma = to_real(key, value);
  } else if (key == "s") {
    p.s = to_real(key, value);
  } else if (key == "b") {
    p.b = to_real(key, value);
  } else if (key == "nmin") {
    p.n_min = to_integer<int>(key, value);
  } else if (key == "omega-s") {
    p.omega_s = to_real(key, value);
  } else if (key == "out") {
    config.out = value;
  } else if (key == "events") {
    config.events = to_bool(key, value);
  } else if (key == "threads") {
    config.threads = to_integer<unsigned>(key, value);
  } else {
    throw ConfigError(key, "unknown configuration key");
  }
  config.explicit_keys.insert(key);
}

void validate(const RunConfig& config) {
  static const std::vector<std::string> scenarios = {"fig1", "fig2", "fig3", "fig4",
                                                     "fig5", "fig6", "fig7", "custom"};
  if (std::find(scenarios.begin(), scenarios.end(), config.scenario) == scenarios.end())
    throw ConfigError("scenario", "unknown scenario '" + config.scenario + "'");
  if (config.replicas < 1) throw ConfigError("replicas", "must be at least 1");
  try {
    validate(config.params);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.key(), std::string(e.what()).substr(e.key().size() + 2));
  }
}

RunConfig load_config(const std::optional<std::filesystem::path>& file, const KeyValues& overrides) {
  RunConfig config;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("config", "cannot read '" + file->string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    for (const auto& [key, value] : parse_key_values(buf.str(), file->string())) apply_setting(config, key, value);
  }
  for (const auto& [key, value] : overrides) apply_setting(config, key, value);
  validate(config);
  return config;
}

}  // namespace firmsim
