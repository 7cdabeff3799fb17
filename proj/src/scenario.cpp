#include "firmsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "firmsim/ensemble.hpp"
#include "firmsim/output.hpp"

namespace firmsim {

namespace {

constexpr int kPanelHorizon = 600;
constexpr int kVariantHorizon = 2000;
constexpr int kTcHorizon = 3000;
const std::vector<double> kPanelQs = {0.3, 0.9, 0.99};

void forbid(const RunConfig& config, const std::string& key) {
  if (config.explicit_keys.count(key) != 0)
    throw ConfigError(key, "is fixed by scenario " + config.scenario + "; use scenario=custom to set it");
}

std::string format_q(double q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", q);
  return buf;
}

}  // namespace

const std::vector<double>& tc_q_grid() {
  static const std::vector<double> grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
  return grid;
}

std::string cell_label(const std::string& scenario, const SimParams& params) {
  return scenario + "_q" + format_q(params.q) + "_" + std::string(to_string(params.policy)) + "_" +
         std::string(to_string(params.variant));
}

Scenario resolve_scenario(const RunConfig& config) {
  validate(config);
  Scenario sc;
  sc.name = config.scenario;
  sc.replicas = config.replicas;
  const bool explicit_horizon = config.explicit_keys.count("tmax") != 0;

  auto add = [&](double q, PolicyKind policy, VariantKind variant, int horizon) {
    SimParams p = config.params;
    p.q = q;
    p.policy = policy;
    p.variant = variant;
    if (!explicit_horizon) p.t_max = horizon;
    sc.cells.push_back({cell_label(sc.name, p), p});
  };

  const std::string& name = config.scenario;
  if (name == "custom") {
    sc.cells.push_back({"custom", config.params});
    return sc;
  }

  forbid(config, "q");
  forbid(config, "variant");
  if (name != "fig5") forbid(config, "policy");

  constexpr auto passive = VariantKind::PassiveAfterRescue;
  constexpr auto active = VariantKind::ActiveAfterRescue;
  if (name == "fig1") {
    add(0.0, PolicyKind::Egalitarian, passive, kPanelHorizon);
  } else if (name == "fig2" || name == "fig3" || name == "fig4") {
    const PolicyKind policy = name == "fig2"   ? PolicyKind::Egalitarian
                              : name == "fig3" ? PolicyKind::LowTech
                                               : PolicyKind::MediumTech;
    for (double q : kPanelQs) add(q, policy, passive, kPanelHorizon);
  } else if (name == "fig5") {
    sc.tc_curve = true;
    for (double q : tc_q_grid()) add(q, config.params.policy, passive, kTcHorizon);
  } else if (name == "fig6") {
    add(0.99, PolicyKind::Egalitarian, passive, kVariantHorizon);
    add(0.99, PolicyKind::Egalitarian, active, kVariantHorizon);
  } else if (name == "fig7") {
    add(0.99, PolicyKind::Egalitarian, active, kVariantHorizon);
  }
  return sc;
}

ScenarioResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                            const ScenarioRunOptions& options) {
  std::filesystem::create_directories(out_dir);
  ScenarioResult result;
  TcCurve curve;

  for (const ScenarioCell& cell : scenario.cells) {
    EnsembleOptions ens;
    ens.threads = options.threads;
    if (options.events) {
      const auto dir = out_dir / (cell.label + ".events");
      std::filesystem::create_directories(dir);
      ens.make_event_sink = [dir](std::size_t k) -> EventSink {
        char name[32];
        std::snprintf(name, sizeof name, "replica_%04zu.jsonl", k);
        auto log = std::make_shared<EventLogWriter>(dir / name);
        return [log](const EventRecord& rec) { log->write(rec); };
      };
    }

    EnsembleStats stats;
    try {
      stats = run_ensemble(cell.params, scenario.replicas, cell.params.seed, ens);
    } catch (const std::exception& e) {
      throw IntegrityError(cell.label + ": " + e.what());
    }
    result.max_renorm_error = std::max(result.max_renorm_error, stats.max_renorm_error);

    const auto csv = out_dir / (cell.label + ".csv");
    emit_timeseries_csv(stats, csv);
    RunMetadata meta;
    meta.source = scenario.name + " cell " + cell.label;
    meta.params = cell.params;
    meta.replicas = scenario.replicas;
    describe_ensemble(meta, stats);
    const auto meta_path = out_dir / (cell.label + ".meta");
    emit_run_metadata(meta, meta_path);
    result.files.push_back(csv);
    result.files.push_back(meta_path);

    if (scenario.tc_curve) curve.push_back(tc_point(cell.params.q, stats));
  }

  if (scenario.tc_curve && !scenario.cells.empty()) {
    std::sort(curve.begin(), curve.end(), [](const TcPoint& a, const TcPoint& b) { return a.q < b.q; });
    const auto csv = out_dir / (scenario.name + "_tc.csv");
    emit_tc_csv(curve, csv);

    RunMetadata meta;
    meta.scenario = scenario.name;
    meta.source = scenario.name + " catch-up time versus q";
    meta.params = scenario.cells.front().params;
    meta.replicas = scenario.replicas;
    meta.omitted_keys = {"q", "variant"};
    std::string grid;
    for (const TcPoint& p : curve) grid += (grid.empty() ? "" : " ") + format_q(p.q);
    meta.notes.emplace_back("q_grid", grid);
    meta.notes.emplace_back("variant", "passive");
    meta.notes.emplace_back("tc_mean", "first crossing of the ensemble-mean <A(t)> of 1");
    meta.notes.emplace_back("tc_sd", "population SD of per-replica crossings (reached replicas only)");
    for (const TcPoint& p : curve) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.6g", p.tc_replica_mean.value_or(NAN));
      meta.notes.emplace_back("tc_replica_mean_q" + format_q(p.q), buf);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", result.max_renorm_error);
    meta.notes.emplace_back("max_renorm_error", buf);
    const auto meta_path = out_dir / (scenario.name + ".meta");
    emit_run_metadata(meta, meta_path);
    result.files.push_back(csv);
    result.files.push_back(meta_path);
  }
  return result;
}

}  // namespace firmsim
