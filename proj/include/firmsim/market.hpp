#pragma once

// Market state of the lattice firm model: firms, the lattice they live on,
// model parameters, and the closed-form quantities used by the dynamics
// (frontier, share-weighted mean technology, dispersion, survival odds).

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "firmsim/rng.hpp"

namespace firmsim {

using FirmId = std::uint32_t;
inline constexpr FirmId kNoFirm = std::numeric_limits<FirmId>::max();

/// Raised for any out-of-range or inconsistent model parameter. Carries the
/// name of the offending configuration key.
class InvalidParameter : public std::invalid_argument {
 public:
  InvalidParameter(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Raised when the model's share bookkeeping drifts beyond tolerance.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PolicyKind { Egalitarian, LowTech, MediumTech, HighTech };
enum class VariantKind { PassiveAfterRescue, ActiveAfterRescue };
enum class Segment { Low, Medium, High };
enum class Neighborhood { VonNeumann4, Moore8 };

std::string_view to_string(PolicyKind p);
std::string_view to_string(VariantKind v);
std::string_view to_string(Segment s);
std::optional<PolicyKind> parse_policy(std::string_view text);
std::optional<VariantKind> parse_variant(std::string_view text);

struct Site {
  int x = 0;
  int y = 0;
  friend bool operator==(const Site&, const Site&) = default;
};

struct Firm {
  FirmId id = kNoFirm;
  double tech = 0.0;
  double share = 0.0;
  int site = -1;  // lattice index
};

struct SimParams {
  double sigma = 0.01;
  double s = 1.0;
  double b = 0.01;
  int n_min = 10;
  double omega_s = 0.1;
  double c = 0.8;
  double q = 0.0;
  PolicyKind policy = PolicyKind::Egalitarian;
  VariantKind variant = VariantKind::PassiveAfterRescue;
  int lx = 10;
  int ly = 10;
  int t_max = 600;
  std::uint64_t seed = 1;
};

/// Throws InvalidParameter naming the first offending key.
void validate(const SimParams& params);

/// Number of firms placed at t = 0: round(c * lx * ly).
int initial_firm_count(const SimParams& params);

/// Ordered (key, value) view of every parameter, using the configuration key
/// names. Reals are printed with round-trip precision.
std::vector<std::pair<std::string, std::string>> parameter_entries(const SimParams& params);

/// FNV-1a digest of parameter_entries().
std::uint64_t params_digest(const SimParams& params);

/// Periodic rectangular lattice. Sites are addressed either as (x, y) or by
/// the flat index y * width + x; neighbor tables are precomputed.
class Lattice {
 public:
  Lattice(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int size() const noexcept { return width_ * height_; }

  bool contains(Site s) const noexcept {
    return s.x >= 0 && s.x < width_ && s.y >= 0 && s.y < height_;
  }
  int index(Site s) const;
  Site site(int index) const;

  FirmId occupant(int index) const { return occupancy_[static_cast<std::size_t>(index)]; }
  bool empty(int index) const { return occupant(index) == kNoFirm; }
  void place(int index, FirmId id);
  void clear(int index);
  int occupied_count() const noexcept { return occupied_; }

  // Order: west, east, north, south.
  const std::array<int, 4>& von_neumann(int index) const {
    return von_neumann_[static_cast<std::size_t>(index)];
  }
  // Row-major over the 3x3 block, centre excluded.
  const std::array<int, 8>& moore(int index) const { return moore_[static_cast<std::size_t>(index)]; }

 private:
  int width_;
  int height_;
  int occupied_ = 0;
  std::vector<FirmId> occupancy_;
  std::vector<std::array<int, 4>> von_neumann_;
  std::vector<std::array<int, 8>> moore_;
};

/// Neighboring sites under periodic boundaries. Throws std::out_of_range
/// for a site outside the lattice.
std::vector<Site> neighbors(const Lattice& lattice, Site site, Neighborhood kind);

/// Lattice occupancy, live-firm registry and sweep clock.
///
/// Firms are stored densely (iteration order is unspecified and changes on
/// removal). Running sums of A, A^2 and share*A are kept so the dynamics can
/// read the current mean and dispersion in O(1) between full recomputations;
/// resync() recomputes them exactly.
class MarketState {
 public:
  explicit MarketState(Lattice lattice);

  const Lattice& lattice() const noexcept { return lattice_; }
  std::size_t firm_count() const noexcept { return firms_.size(); }
  std::span<const Firm> firms() const noexcept { return firms_; }

  bool alive(FirmId id) const noexcept {
    return id < slot_of_.size() && slot_of_[id] != kNoSlot;
  }
  const Firm& firm(FirmId id) const;

  FirmId add_firm(int site, double tech, double share);
  void remove_firm(FirmId id);
  void move_firm(FirmId id, int site);
  void set_tech(FirmId id, double tech);
  void set_share(FirmId id, double share);
  /// Adds `delta` to every live firm's share.
  void add_to_all_shares(double delta);
  /// Multiplies every live firm's share by `factor`.
  void scale_all_shares(double factor);

  double share_sum() const;
  double running_weighted_tech() const noexcept { return weighted_tech_sum_; }
  double running_tech_sd() const;
  void resync();

  int sweep() const noexcept { return sweep_; }
  double frontier_value() const noexcept { return frontier_value_; }
  void set_clock(int sweep, double sigma);

  FirmId next_id() const noexcept { return static_cast<FirmId>(slot_of_.size()); }

 private:
  static constexpr std::uint32_t kNoSlot = std::numeric_limits<std::uint32_t>::max();
  Firm& mutable_firm(FirmId id);

  Lattice lattice_;
  std::vector<Firm> firms_;
  std::vector<std::uint32_t> slot_of_;
  double tech_sum_ = 0.0;
  double tech_sq_sum_ = 0.0;
  double weighted_tech_sum_ = 0.0;
  int sweep_ = 0;
  double frontier_value_ = 1.0;
};

/// F(t) = exp(sigma * t).
double frontier(double t, double sigma);

/// Share-weighted mean technology, sum of share * tech, recomputed from the
/// registry. Throws std::logic_error on an empty market.
double weighted_mean_tech(const MarketState& market);

/// sqrt(sum (A_i - <A>)^2 / N) with <A> the share-weighted mean and the
/// deviations unweighted.
double population_sd_tech(const MarketState& market);

double survival_probability(double tech, double mean_tech, double frontier_value, double s);

Segment classify_segment(double tech, double mean_tech, double sigma_g);

bool policy_covers(PolicyKind policy, Segment segment);

/// Places round(c * lx * ly) firms on distinct uniformly chosen sites with
/// tech ~ U[0, 1) and equal shares.
///
/// Draw order: a partial Fisher-Yates over site indices (one bounded draw per
/// firm), then one uniform per firm for its technology, in placement order.
MarketState init_market(const SimParams& params, Rng& rng);

}  // namespace firmsim
