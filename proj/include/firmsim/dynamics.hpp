#pragma once

// One Monte Carlo sweep of the firm market: random-order visits of every
// firm alive at sweep start, each running the survival check (with optional
// government rescue), a move attempt, external technology diffusion for
// isolated movers, and merge / spin-off interactions with neighbors.
//
// Random draws per firm step, in order:
//   1. r1 ~ U(0,1)               survival roll (skipped when N <= N_min)
//   2. q_rnd ~ U(0,1)            only if r1 > p and the policy covers the firm
//   3. direction in [0,4)        von Neumann move target
//   4a. r2 ~ U(0,1)              moved with no Moore neighbors
//   4b. partner in [0,k)         moved next to k >= 1 firms
//       then u ~ U[0,1)          merge if u < b
//       then spot in [0,8)       spin-off site, only when not merging
// A sweep first spends N-1 bounded draws on a Fisher-Yates shuffle of the
// firms alive at sweep start.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include "firmsim/market.hpp"
#include "firmsim/rng.hpp"

namespace firmsim {

/// Largest |sum of shares - 1| tolerated at a sweep boundary before the
/// run is declared corrupt.
inline constexpr double kShareTolerance = 1e-2;

// Survived, MovedNoDiffusion and Idle are part of the log vocabulary but the
// engine never produces them as a terminal kind: a surviving firm always ends
// its step by diffusing, merging, or spinning off (possibly blocked).
enum class EventKind : std::uint8_t {
  Survived,
  Bankrupted,
  Rescued,
  MovedAndCopiedFrontier,
  MovedNoDiffusion,
  Merged,
  SpinOff,
  SpinOffBlocked,
  Idle,
};
inline constexpr std::size_t kEventKindCount = 9;
using EventCounts = std::array<std::uint64_t, kEventKindCount>;

std::string_view to_string(EventKind kind);

/// Terminal outcome of one firm step.
struct EventRecord {
  EventKind kind = EventKind::Idle;
  FirmId firm = kNoFirm;
  int sweep = 0;
  FirmId other = kNoFirm;  // absorbed firm (Merged) or new firm (SpinOff)
  bool rescued = false;    // a government rescue happened earlier in this step
  bool moved = false;
};

using EventSink = std::function<void(const EventRecord&)>;

struct SweepStats {
  std::size_t n_firms = 0;
  double mean_tech = 0.0;
  double ratio = 0.0;
  double renorm_error = 0.0;
  EventCounts events{};
  std::uint64_t rescues = 0;  // steps with a rescue, any variant
};

enum class BankruptcyOutcome { Survives, Rescued, Bankrupts };

/// Removes the departing firm and hands its share out equally to the rest.
/// Throws std::logic_error if it is the last firm.
void redistribute_shares_equal(MarketState& market, FirmId departing);

/// Survival roll for a firm, requires N > N_min. On Bankrupts the firm has
/// already been removed and its share redistributed.
BankruptcyOutcome attempt_bankruptcy(MarketState& market, FirmId firm, const SimParams& params, Rng& rng);

/// tech + r2 * (frontier - tech), kept strictly below the frontier.
double external_diffusion(double tech, double frontier_value, double r2);

/// Merge (probability b) or spin-off between neighbors i and j.
EventRecord interact(MarketState& market, FirmId i, FirmId j, const SimParams& params, Rng& rng);

/// Divides every share by their sum and returns |sum - 1| before the
/// correction. Throws IntegrityError when that exceeds `tolerance`.
double renormalize_shares(MarketState& market, double tolerance = kShareTolerance);

EventRecord firm_update(MarketState& market, FirmId firm, const SimParams& params, Rng& rng);

/// One sweep. Observables are measured from the state at sweep start; the
/// clock and frontier advance at the end.
SweepStats sweep(MarketState& market, const SimParams& params, Rng& rng, const EventSink* sink = nullptr);

}  // namespace firmsim
