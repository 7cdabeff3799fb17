#include "firmsim/output.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace firmsim {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

void write_timeseries_csv(const EnsembleStats& stats, std::ostream& out) {
  out << kTimeseriesHeader << '\n';
  for (std::size_t t = 0; t < stats.length(); ++t) {
    out << t << ',' << num(stats.n_firms.mean[t]) << ',' << num(stats.n_firms.sd[t]) << ','
        << num(stats.mean_tech.mean[t]) << ',' << num(stats.mean_tech.sd[t]) << ',' << num(stats.ratio.mean[t])
        << ',' << num(stats.ratio.sd[t]) << '\n';
  }
}

void write_tc_csv(const TcCurve& curve, std::ostream& out) {
  out << kTcHeader << '\n';
  for (const TcPoint& p : curve) {
    out << num(p.q) << ',' << num(p.tc_mean.value_or(NAN)) << ',' << num(p.tc_sd) << ','
        << num(p.fraction_reached) << '\n';
  }
}

void emit_timeseries_csv(const EnsembleStats& stats, const std::filesystem::path& path) {
  auto out = open_for_writing(path);
  write_timeseries_csv(stats, out);
  finish(out, path);
}

void emit_tc_csv(const TcCurve& curve, const std::filesystem::path& path) {
  auto out = open_for_writing(path);
  write_tc_csv(curve, out);
  finish(out, path);
}

void describe_ensemble(RunMetadata& meta, const EnsembleStats& stats) {
  auto& n = meta.notes;
  n.emplace_back("base_seed", std::to_string(stats.base_seed));
  n.emplace_back("replica_seed_derivation", "mix64(mix64(seed) ^ mix64(k + 0xD1B54A32D192ED03)), k = 0..replicas-1");
  n.emplace_back("sd_convention", "population (divide by number of replicas)");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", stats.max_renorm_error);
  n.emplace_back("max_renorm_error", buf);
  n.emplace_back("integrity", stats.max_renorm_error <= kShareTolerance ? "ok" : "violated");
  n.emplace_back("tc_ensemble_mean", stats.tc ? std::to_string(*stats.tc) : "not reached");
  n.emplace_back("tc_replica_mean", stats.replica_tc.mean ? num(*stats.replica_tc.mean) : "not reached");
  n.emplace_back("tc_replica_sd", num(stats.replica_tc.sd));
  n.emplace_back("tc_fraction_reached", num(stats.replica_tc.fraction_reached));
  n.emplace_back("rescues_total", std::to_string(stats.rescues_total));
  for (std::size_t k = 0; k < kEventKindCount; ++k)
    n.emplace_back(std::string("events_") + std::string(to_string(static_cast<EventKind>(k))),
                   std::to_string(stats.event_totals[k]));
  std::string seeds;
  for (std::size_t k = 0; k < stats.replica_seeds.size(); ++k) {
    if (k != 0) seeds += ' ';
    seeds += std::to_string(stats.replica_seeds[k]);
  }
  n.emplace_back("replica_seeds", seeds);
}

void write_run_metadata(const RunMetadata& meta, std::ostream& out) {
  out << "# firmsim run metadata\n";
  out << "# version: " << kVersion << '\n';
  if (!meta.source.empty()) out << "# source: " << meta.source << '\n';
  out << "scenario=" << meta.scenario << '\n';
  out << "replicas=" << meta.replicas << '\n';
  for (const auto& [key, value] : parameter_entries(meta.params)) {
    if (meta.omitted_keys.count(key) != 0) continue;
    out << key << '=' << value << '\n';
  }
  for (const auto& [key, value] : meta.notes) out << "# " << key << ": " << value << '\n';
}

void emit_run_metadata(const RunMetadata& meta, const std::filesystem::path& path) {
  auto out = open_for_writing(path);
  write_run_metadata(meta, out);
  finish(out, path);
}

std::string format_event_json(const EventRecord& rec) {
  char other[24] = "null";
  if (rec.other != kNoFirm) std::snprintf(other, sizeof other, "%" PRIu32, rec.other);
  char buf[192];
  std::snprintf(buf, sizeof buf, R"({"sweep":%d,"firm":%)" PRIu32 R"(,"event":"%s","other":%s,"rescued":%s,"moved":%s})",
                rec.sweep, rec.firm, std::string(to_string(rec.kind)).c_str(), other,
                rec.rescued ? "true" : "false", rec.moved ? "true" : "false");
  return buf;
}

EventLogWriter::EventLogWriter(const std::filesystem::path& path) : out_(open_for_writing(path)) {}

void EventLogWriter::write(const EventRecord& rec) { out_ << format_event_json(rec) << '\n'; }

}  // namespace firmsim
