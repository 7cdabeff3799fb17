#pragma once

// Replica orchestration and across-replica statistics.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "firmsim/dynamics.hpp"
#include "firmsim/market.hpp"

namespace firmsim {

/// Threshold for the technology catch-up time: F(0) = 1.
inline constexpr double kCatchUpThreshold = 1.0;

struct TrajectoryPoint {
  int t = 0;
  std::size_t n_firms = 0;
  double mean_tech = 0.0;
  double ratio = 0.0;
};

/// One replica's observables, measured at the beginning of sweeps 0..t_max.
struct Trajectory {
  std::uint64_t params_digest = 0;
  std::uint64_t seed = 0;
  std::vector<TrajectoryPoint> series;               // t_max + 1 points
  std::vector<std::uint32_t> rescues_per_sweep;      // t_max entries
  std::vector<std::uint32_t> bankruptcies_per_sweep;  // t_max entries
  EventCounts event_totals{};
  std::uint64_t rescues_total = 0;
  double max_renorm_error = 0.0;
};

struct Band {
  std::vector<double> mean;
  std::vector<double> sd;  // population SD across replicas
};

/// Catch-up times of the individual replicas.
struct ReplicaTc {
  std::size_t reached = 0;
  double fraction_reached = 0.0;
  std::optional<double> mean;  // over replicas that reached the threshold
  double sd = 0.0;
};

struct EnsembleStats {
  std::size_t n_replicas = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> replica_seeds;
  Band n_firms;
  Band mean_tech;
  Band ratio;
  std::optional<int> tc;  // first crossing of the ensemble-mean <A(t)>
  ReplicaTc replica_tc;
  EventCounts event_totals{};
  std::uint64_t rescues_total = 0;
  std::vector<std::uint64_t> rescues_per_sweep;
  std::vector<std::uint64_t> bankruptcies_per_sweep;
  double max_renorm_error = 0.0;

  std::size_t length() const noexcept { return n_firms.mean.size(); }
};

struct EnsembleOptions {
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;
  /// Optional per-replica event sink factory, called once per replica index.
  std::function<EventSink(std::size_t)> make_event_sink;
};

Trajectory run_replica(const SimParams& params, std::uint64_t replica_seed, const EventSink* sink = nullptr);

/// Mean and population SD per time step. All trajectories must have equal
/// length. The reduction always walks replicas in index order.
EnsembleStats aggregate(std::span<const Trajectory> replicas);

/// Runs n_replicas replicas seeded by derive_replica_seed(base_seed, k).
/// On failure throws IntegrityError naming the replica and its seed.
EnsembleStats run_ensemble(const SimParams& params, std::size_t n_replicas, std::uint64_t base_seed,
                           const EnsembleOptions& options = {});

/// Smallest t with series[t] >= threshold.
std::optional<int> estimate_tc(std::span<const double> series, double threshold = kCatchUpThreshold);

ReplicaTc replica_tc_summary(std::span<const Trajectory> replicas, double threshold = kCatchUpThreshold);

struct TcPoint {
  double q = 0.0;
  std::optional<double> tc_mean;  // crossing of the ensemble-mean series
  double tc_sd = 0.0;             // SD of per-replica crossings
  double fraction_reached = 0.0;
  std::optional<double> tc_replica_mean;  // mean of per-replica crossings
};

using TcCurve = std::vector<TcPoint>;

/// Catch-up time summary of one ensemble run at intervention probability q.
TcPoint tc_point(double q, const EnsembleStats& stats);

/// Catch-up time versus intervention probability. The variant is forced to
/// PassiveAfterRescue; q_values must be distinct and are reported sorted.
/// `on_ensemble` (optional) sees each ensemble as it completes.
TcCurve tc_vs_q(const SimParams& params, std::span<const double> q_values, std::size_t n_replicas,
                std::uint64_t base_seed, const EnsembleOptions& options = {},
                const std::function<void(const SimParams&, const EnsembleStats&)>& on_ensemble = {});

}  // namespace firmsim
