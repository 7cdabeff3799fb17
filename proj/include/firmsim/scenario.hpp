#pragma once

// Scenario presets (fixed parameter grids for the standard studies), plus the
// driver that runs them and writes CSV and metadata files.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "firmsim/config.hpp"
#include "firmsim/market.hpp"

namespace firmsim {

struct ScenarioCell {
  std::string label;
  SimParams params;
};

struct Scenario {
  std::string name;
  std::size_t replicas = 400;
  std::vector<ScenarioCell> cells;  // one time-series ensemble each
  bool tc_curve = false;            // fig5: cells form a catch-up-time curve over q
};

/// q grid of the catch-up-time preset.
const std::vector<double>& tc_q_grid();

/// Resolves presets: copies the configured parameters and fills in the
/// preset's q / policy / variant axes and horizon. Setting a preset axis
/// explicitly is a ConfigError; the horizon honors an explicit tmax.
Scenario resolve_scenario(const RunConfig& config);

std::string cell_label(const std::string& scenario, const SimParams& params);

struct ScenarioRunOptions {
  unsigned threads = 0;
  bool events = false;
};

struct ScenarioResult {
  std::vector<std::filesystem::path> files;
  double max_renorm_error = 0.0;
};

/// Runs every ensemble of the scenario and writes its files into `out_dir`
/// (created if missing). Engine failures are rethrown as IntegrityError
/// prefixed with the failing cell's label.
ScenarioResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                            const ScenarioRunOptions& options = {});

}  // namespace firmsim
