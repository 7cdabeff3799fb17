#pragma once

// File emission: per-sweep ensemble bands (CSV), catch-up time curves (CSV),
// run metadata (key=value text that doubles as a config file), and the
// optional JSON-lines event log.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "firmsim/dynamics.hpp"
#include "firmsim/ensemble.hpp"
#include "firmsim/market.hpp"

namespace firmsim {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kTimeseriesHeader = "t,N_mean,N_sd,A_mean,A_sd,ratio_mean,ratio_sd";
inline constexpr const char* kTcHeader = "q,tc_mean,tc_sd,fraction_reached";

void write_timeseries_csv(const EnsembleStats& stats, std::ostream& out);
void write_tc_csv(const TcCurve& curve, std::ostream& out);

/// Throws std::runtime_error if the path cannot be written.
void emit_timeseries_csv(const EnsembleStats& stats, const std::filesystem::path& path);
void emit_tc_csv(const TcCurve& curve, const std::filesystem::path& path);

struct RunMetadata {
  std::string scenario = "custom";
  std::string source;  // human-readable origin, written as a comment
  SimParams params;
  std::size_t replicas = 0;
  /// Parameter keys not written as settings (grid axes of a scenario).
  std::set<std::string> omitted_keys;
  /// Extra "# key: value" lines (integrity summary, catch-up times, ...).
  std::vector<std::pair<std::string, std::string>> notes;
};

/// Adds the integrity summary and seed list of an ensemble to `meta.notes`.
void describe_ensemble(RunMetadata& meta, const EnsembleStats& stats);

void write_run_metadata(const RunMetadata& meta, std::ostream& out);
void emit_run_metadata(const RunMetadata& meta, const std::filesystem::path& path);

/// JSON-lines event log, one object per firm step:
///   {"sweep":12,"firm":34,"event":"SpinOff","other":56,"rescued":false,"moved":true}
/// "other" is null unless the event is Merged (absorbed firm) or SpinOff (new firm).
class EventLogWriter {
 public:
  explicit EventLogWriter(const std::filesystem::path& path);
  void write(const EventRecord& rec);

 private:
  std::ofstream out_;
};

std::string format_event_json(const EventRecord& rec);

}  // namespace firmsim
