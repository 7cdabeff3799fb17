#include "firmsim/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

namespace firmsim {

namespace {

TrajectoryPoint observe(const MarketState& market) {
  TrajectoryPoint p;
  p.t = market.sweep();
  p.n_firms = market.firm_count();
  p.mean_tech = weighted_mean_tech(market);
  p.ratio = p.mean_tech / market.frontier_value();
  return p;
}

template <typename Get>
Band band_of(std::span<const Trajectory> replicas, std::size_t length, Get get) {
  Band band;
  band.mean.assign(length, 0.0);
  band.sd.assign(length, 0.0);
  const double n = static_cast<double>(replicas.size());
  for (std::size_t t = 0; t < length; ++t) {
    double sum = 0.0;
    for (const Trajectory& r : replicas) sum += get(r.series[t]);
    const double mean = sum / n;
    double sq = 0.0;
    for (const Trajectory& r : replicas) {
      const double d = get(r.series[t]) - mean;
      sq += d * d;
    }
    band.mean[t] = mean;
    band.sd[t] = std::sqrt(sq / n);
  }
  return band;
}

}  // namespace

Trajectory run_replica(const SimParams& params, std::uint64_t replica_seed, const EventSink* sink) {
  Rng rng(replica_seed);
  MarketState market = init_market(params, rng);

  Trajectory traj;
  traj.params_digest = params_digest(params);
  traj.seed = replica_seed;
  const auto steps = static_cast<std::size_t>(params.t_max);
  traj.series.reserve(steps + 1);
  traj.rescues_per_sweep.reserve(steps);
  traj.bankruptcies_per_sweep.reserve(steps);

  for (int t = 0; t < params.t_max; ++t) {
    const SweepStats stats = sweep(market, params, rng, sink);
    traj.series.push_back({t, stats.n_firms, stats.mean_tech, stats.ratio});
    traj.rescues_per_sweep.push_back(static_cast<std::uint32_t>(stats.rescues));
    traj.bankruptcies_per_sweep.push_back(
        static_cast<std::uint32_t>(stats.events[static_cast<std::size_t>(EventKind::Bankrupted)]));
    for (std::size_t k = 0; k < kEventKindCount; ++k) traj.event_totals[k] += stats.events[k];
    traj.rescues_total += stats.rescues;
    traj.max_renorm_error = std::max(traj.max_renorm_error, stats.renorm_error);
  }
  traj.series.push_back(observe(market));
  return traj;
}

std::optional<int> estimate_tc(std::span<const double> series, double threshold) {
  for (std::size_t t = 0; t < series.size(); ++t)
    if (series[t] >= threshold) return static_cast<int>(t);
  return std::nullopt;
}

ReplicaTc replica_tc_summary(std::span<const Trajectory> replicas, double threshold) {
  ReplicaTc out;
  std::vector<double> times;
  std::vector<double> series;
  for (const Trajectory& r : replicas) {
    series.clear();
    for (const TrajectoryPoint& p : r.series) series.push_back(p.mean_tech);
    if (auto tc = estimate_tc(series, threshold)) times.push_back(*tc);
  }
  out.reached = times.size();
  out.fraction_reached = replicas.empty() ? 0.0 : static_cast<double>(times.size()) / replicas.size();
  if (!times.empty()) {
    double sum = 0.0;
    for (double t : times) sum += t;
    const double mean = sum / times.size();
    double sq = 0.0;
    for (double t : times) sq += (t - mean) * (t - mean);
    out.mean = mean;
    out.sd = std::sqrt(sq / times.size());
  }
  return out;
}

EnsembleStats aggregate(std::span<const Trajectory> replicas) {
  if (replicas.empty()) throw std::invalid_argument("aggregate: no replicas");
  const std::size_t length = replicas.front().series.size();
  const std::size_t sweeps = replicas.front().rescues_per_sweep.size();
  for (const Trajectory& r : replicas)
    if (r.series.size() != length || r.rescues_per_sweep.size() != sweeps ||
        r.bankruptcies_per_sweep.size() != sweeps)
      throw std::invalid_argument("aggregate: trajectories differ in length");

  EnsembleStats stats;
  stats.n_replicas = replicas.size();
  stats.n_firms = band_of(replicas, length, [](const TrajectoryPoint& p) { return static_cast<double>(p.n_firms); });
  stats.mean_tech = band_of(replicas, length, [](const TrajectoryPoint& p) { return p.mean_tech; });
  stats.ratio = band_of(replicas, length, [](const TrajectoryPoint& p) { return p.ratio; });
  stats.tc = estimate_tc(stats.mean_tech.mean);
  stats.replica_tc = replica_tc_summary(replicas);

  stats.rescues_per_sweep.assign(sweeps, 0);
  stats.bankruptcies_per_sweep.assign(sweeps, 0);
  for (const Trajectory& r : replicas) {
    stats.replica_seeds.push_back(r.seed);
    for (std::size_t k = 0; k < kEventKindCount; ++k) stats.event_totals[k] += r.event_totals[k];
    stats.rescues_total += r.rescues_total;
    for (std::size_t t = 0; t < sweeps; ++t) {
      stats.rescues_per_sweep[t] += r.rescues_per_sweep[t];
      stats.bankruptcies_per_sweep[t] += r.bankruptcies_per_sweep[t];
    }
    stats.max_renorm_error = std::max(stats.max_renorm_error, r.max_renorm_error);
  }
  return stats;
}

EnsembleStats run_ensemble(const SimParams& params, std::size_t n_replicas, std::uint64_t base_seed,
                           const EnsembleOptions& options) {
  if (n_replicas < 1) throw std::invalid_argument("run_ensemble: need at least one replica");
  validate(params);

  std::vector<Trajectory> replicas(n_replicas);
  std::vector<std::exception_ptr> failures(n_replicas);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < n_replicas; k = next.fetch_add(1)) {
      try {
        EventSink sink;
        if (options.make_event_sink) sink = options.make_event_sink(k);
        replicas[k] = run_replica(params, derive_replica_seed(base_seed, k), sink ? &sink : nullptr);
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };

  unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_replicas));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  for (std::size_t k = 0; k < n_replicas; ++k) {
    if (!failures[k]) continue;
    const std::string where = "replica " + std::to_string(k) + " (seed " +
                              std::to_string(derive_replica_seed(base_seed, k)) + "): ";
    try {
      std::rethrow_exception(failures[k]);
    } catch (const std::exception& e) {
      throw IntegrityError(where + e.what());
    }
  }

  EnsembleStats stats = aggregate(replicas);
  stats.base_seed = base_seed;
  return stats;
}

TcPoint tc_point(double q, const EnsembleStats& stats) {
  TcPoint point;
  point.q = q;
  if (stats.tc) point.tc_mean = static_cast<double>(*stats.tc);
  point.tc_sd = stats.replica_tc.sd;
  point.fraction_reached = stats.replica_tc.fraction_reached;
  point.tc_replica_mean = stats.replica_tc.mean;
  return point;
}

TcCurve tc_vs_q(const SimParams& params, std::span<const double> q_values, std::size_t n_replicas,
                std::uint64_t base_seed, const EnsembleOptions& options,
                const std::function<void(const SimParams&, const EnsembleStats&)>& on_ensemble) {
  std::vector<double> qs(q_values.begin(), q_values.end());
  std::sort(qs.begin(), qs.end());
  if (std::adjacent_find(qs.begin(), qs.end()) != qs.end())
    throw std::invalid_argument("tc_vs_q: q values must be distinct");

  TcCurve curve;
  for (double q : qs) {
    SimParams cell = params;
    cell.q = q;
    cell.variant = VariantKind::PassiveAfterRescue;
    const EnsembleStats stats = run_ensemble(cell, n_replicas, base_seed, options);
    if (on_ensemble) on_ensemble(cell, stats);

    curve.push_back(tc_point(q, stats));
  }
  return curve;
}

}  // namespace firmsim
