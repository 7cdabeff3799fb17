// Command-line front end: resolves a configuration, runs a scenario, and
// writes its CSV and metadata files.
//
// Exit codes: 0 success, 1 configuration error, 2 integrity failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "firmsim/config.hpp"
#include "firmsim/output.hpp"
#include "firmsim/scenario.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIntegrity = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice firm-market Monte Carlo with government intervention"};
  app.set_version_flag("--version", firmsim::kVersion);

  std::string config_path;
  app.add_option("--config", config_path, "key=value configuration file (flags override it)");

  // Every config key is also a flag; values are collected as text and go
  // through the same parser as the file, so precedence is file < flags.
  std::vector<std::pair<std::string, std::string>> flag_specs = {
      {"scenario", "fig1..fig7 or custom"},
      {"q", "government intervention probability"},
      {"policy", "egalitarian | low | medium | high"},
      {"variant", "passive | active (behavior after a rescue)"},
      {"replicas", "number of replicas per ensemble"},
      {"tmax", "horizon in sweeps"},
      {"seed", "base seed"},
      {"lx", "lattice width"},
      {"ly", "lattice height"},
      {"c", "initial lattice concentration"},
      {"sigma", "frontier growth rate"},
      {"s", "bankruptcy susceptibility"},
      {"b", "merge probability"},
      {"nmin", "minimum number of firms"},
      {"omega-s", "spin-off share fraction"},
      {"out", "output directory"},
      {"threads", "worker threads (0 = all cores)"},
  };
  std::vector<std::string> values(flag_specs.size());
  std::vector<CLI::Option*> options;
  for (std::size_t i = 0; i < flag_specs.size(); ++i)
    options.push_back(app.add_option("--" + flag_specs[i].first, values[i], flag_specs[i].second));
  bool events = false;
  auto* events_flag = app.add_flag("--events", events, "write a JSON-lines event log per replica");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  firmsim::KeyValues overrides;
  for (std::size_t i = 0; i < flag_specs.size(); ++i)
    if (options[i]->count() > 0) overrides.emplace_back(flag_specs[i].first, values[i]);
  if (events_flag->count() > 0) overrides.emplace_back("events", events ? "true" : "false");

  firmsim::RunConfig config;
  firmsim::Scenario scenario;
  try {
    std::optional<std::filesystem::path> file;
    if (!config_path.empty()) file = config_path;
    config = firmsim::load_config(file, overrides);
    scenario = firmsim::resolve_scenario(config);
  } catch (const firmsim::InvalidParameter& e) {
    std::cerr << "firmsim: configuration error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    firmsim::ScenarioRunOptions run;
    run.threads = config.threads;
    run.events = config.events;
    const auto result = firmsim::run_scenario(scenario, config.out, run);
    for (const auto& path : result.files) std::cout << path.string() << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", result.max_renorm_error);
    std::cerr << "firmsim: " << scenario.cells.size() << " ensemble(s), max share normalization error " << buf
              << '\n';
  } catch (const firmsim::IntegrityError& e) {
    std::cerr << "firmsim: integrity failure: " << e.what() << '\n';
    return kExitIntegrity;
  } catch (const std::exception& e) {
    std::cerr << "firmsim: " << e.what() << '\n';
    return kExitIntegrity;
  }
  return 0;
}
