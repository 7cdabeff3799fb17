#include "firmsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace firmsim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Survived: return "Survived";
    case EventKind::Bankrupted: return "Bankrupted";
    case EventKind::Rescued: return "Rescued";
    case EventKind::MovedAndCopiedFrontier: return "MovedAndCopiedFrontier";
    case EventKind::MovedNoDiffusion: return "MovedNoDiffusion";
    case EventKind::Merged: return "Merged";
    case EventKind::SpinOff: return "SpinOff";
    case EventKind::SpinOffBlocked: return "SpinOffBlocked";
    case EventKind::Idle: return "Idle";
  }
  return "?";
}

void redistribute_shares_equal(MarketState& market, FirmId departing) {
  const std::size_t n = market.firm_count();
  if (n < 2) throw std::logic_error("redistribute_shares_equal: no surviving firm to receive the share");
  const double share = market.firm(departing).share;
  market.remove_firm(departing);
  if (share != 0.0) market.add_to_all_shares(share / static_cast<double>(n - 1));
}

BankruptcyOutcome attempt_bankruptcy(MarketState& market, FirmId id, const SimParams& params, Rng& rng) {
  if (market.firm_count() <= static_cast<std::size_t>(params.n_min))
    throw std::logic_error("attempt_bankruptcy called at or below the N_min floor");
  const Firm& f = market.firm(id);
  const double mean = market.running_weighted_tech();
  const double p = survival_probability(f.tech, mean, market.frontier_value(), params.s);
  if (rng.uniform_open() <= p) return BankruptcyOutcome::Survives;

  const bool covered = params.policy == PolicyKind::Egalitarian ||
                       policy_covers(params.policy, classify_segment(f.tech, mean, market.running_tech_sd()));
  if (covered && rng.uniform_open() <= params.q) return BankruptcyOutcome::Rescued;

  redistribute_shares_equal(market, id);
  return BankruptcyOutcome::Bankrupts;
}

double external_diffusion(double tech, double frontier_value, double r2) {
  const double next = tech + r2 * (frontier_value - tech);
  // r2 just below 1 can round onto the frontier itself.
  return next < frontier_value ? next : std::nextafter(frontier_value, 0.0);
}

EventRecord interact(MarketState& market, FirmId i, FirmId j, const SimParams& params, Rng& rng) {
  if (i == j) throw std::logic_error("interact: a firm cannot interact with itself");
  const Firm fi = market.firm(i);
  const Firm fj = market.firm(j);
  const double best = std::max(fi.tech, fj.tech);

  EventRecord rec;
  rec.firm = i;
  rec.sweep = market.sweep();

  if (rng.uniform() < params.b) {
    market.remove_firm(j);
    market.set_share(i, fi.share + fj.share);
    market.set_tech(i, best);
    rec.kind = EventKind::Merged;
    rec.other = j;
    return rec;
  }

  const int spot = market.lattice().moore(fi.site)[rng.below(8)];
  if (!market.lattice().empty(spot)) {
    rec.kind = EventKind::SpinOffBlocked;
    return rec;
  }
  const double child_share = params.omega_s * (fi.share + fj.share);
  market.set_share(i, fi.share - fi.share * params.omega_s);
  market.set_share(j, fj.share - fj.share * params.omega_s);
  rec.other = market.add_firm(spot, best, child_share);
  rec.kind = EventKind::SpinOff;
  return rec;
}

double renormalize_shares(MarketState& market, double tolerance) {
  const double sum = market.share_sum();
  const double err = std::abs(sum - 1.0);
  if (!(sum > 0.0) || err > tolerance) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "share normalization error %.6g exceeds tolerance %.3g at sweep %d", err,
                  tolerance, market.sweep());
    throw IntegrityError(buf);
  }
  market.scale_all_shares(1.0 / sum);
  return err;
}

EventRecord firm_update(MarketState& market, FirmId id, const SimParams& params, Rng& rng) {
  if (!market.alive(id)) throw std::logic_error("firm_update on dead firm " + std::to_string(id));

  EventRecord rec;
  rec.firm = id;
  rec.sweep = market.sweep();

  if (market.firm_count() > static_cast<std::size_t>(params.n_min)) {
    switch (attempt_bankruptcy(market, id, params, rng)) {
      case BankruptcyOutcome::Bankrupts:
        rec.kind = EventKind::Bankrupted;
        return rec;
      case BankruptcyOutcome::Rescued:
        rec.rescued = true;
        if (params.variant == VariantKind::PassiveAfterRescue) {
          rec.kind = EventKind::Rescued;
          return rec;
        }
        break;
      case BankruptcyOutcome::Survives:
        break;
    }
  }

  const Lattice& lattice = market.lattice();
  const int target = lattice.von_neumann(market.firm(id).site)[rng.below(4)];
  if (!lattice.empty(target)) {
    const EventRecord r = interact(market, id, lattice.occupant(target), params, rng);
    rec.kind = r.kind;
    rec.other = r.other;
    return rec;
  }

  market.move_firm(id, target);
  rec.moved = true;

  std::array<FirmId, 8> around{};
  std::size_t found = 0;
  for (int n : lattice.moore(target))
    if (!lattice.empty(n)) around[found++] = lattice.occupant(n);

  if (found == 0) {
    const double tech = market.firm(id).tech;
    market.set_tech(id, external_diffusion(tech, market.frontier_value(), rng.uniform_open()));
    rec.kind = EventKind::MovedAndCopiedFrontier;
    return rec;
  }
  const EventRecord r = interact(market, id, around[rng.below(found)], params, rng);
  rec.kind = r.kind;
  rec.other = r.other;
  return rec;
}

SweepStats sweep(MarketState& market, const SimParams& params, Rng& rng, const EventSink* sink) {
  if (market.firm_count() == 0) throw IntegrityError("market has no firms left");

  SweepStats stats;
  stats.n_firms = market.firm_count();
  stats.mean_tech = weighted_mean_tech(market);
  stats.ratio = stats.mean_tech / market.frontier_value();

  std::vector<FirmId> order;
  order.reserve(market.firm_count());
  for (const Firm& f : market.firms()) order.push_back(f.id);
  for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);

  for (FirmId id : order) {
    if (!market.alive(id)) continue;
    const EventRecord rec = firm_update(market, id, params, rng);
    ++stats.events[static_cast<std::size_t>(rec.kind)];
    if (rec.rescued) ++stats.rescues;
    if (sink != nullptr && *sink) (*sink)(rec);
  }

  stats.renorm_error = renormalize_shares(market);
  market.set_clock(market.sweep() + 1, params.sigma);
  return stats;
}

}  // namespace firmsim
