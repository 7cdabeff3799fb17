#include "firmsim/market.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace firmsim {

std::string_view to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::Egalitarian: return "egalitarian";
    case PolicyKind::LowTech: return "low";
    case PolicyKind::MediumTech: return "medium";
    case PolicyKind::HighTech: return "high";
  }
  return "?";
}

std::string_view to_string(VariantKind v) {
  switch (v) {
    case VariantKind::PassiveAfterRescue: return "passive";
    case VariantKind::ActiveAfterRescue: return "active";
  }
  return "?";
}

std::string_view to_string(Segment s) {
  switch (s) {
    case Segment::Low: return "low";
    case Segment::Medium: return "medium";
    case Segment::High: return "high";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy(std::string_view text) {
  if (text == "egalitarian") return PolicyKind::Egalitarian;
  if (text == "low" || text == "low-tech") return PolicyKind::LowTech;
  if (text == "medium" || text == "medium-tech") return PolicyKind::MediumTech;
  if (text == "high" || text == "high-tech") return PolicyKind::HighTech;
  return std::nullopt;
}

std::optional<VariantKind> parse_variant(std::string_view text) {
  if (text == "passive") return VariantKind::PassiveAfterRescue;
  if (text == "active") return VariantKind::ActiveAfterRescue;
  return std::nullopt;
}

namespace {

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw InvalidParameter(key, what);
}

bool is_probability(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

// Shortest text that parses back to the same double.
std::string format_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

int initial_firm_count(const SimParams& params) {
  return static_cast<int>(std::lround(params.c * params.lx * params.ly));
}

void validate(const SimParams& p) {
  require(std::isfinite(p.sigma) && p.sigma >= 0.0, "sigma", "must be a finite non-negative rate");
  require(std::isfinite(p.s) && p.s >= 0.0, "s", "must be finite and non-negative");
  require(is_probability(p.b), "b", "must lie in [0, 1]");
  require(is_probability(p.q), "q", "must lie in [0, 1]");
  require(std::isfinite(p.omega_s) && p.omega_s > 0.0 && p.omega_s < 1.0, "omega-s",
          "must lie in the open interval (0, 1)");
  require(std::isfinite(p.c) && p.c > 0.0 && p.c <= 1.0, "c", "must lie in (0, 1]");
  // Periodic neighbor sets are only distinct for sides of at least 3 sites.
  require(p.lx >= 3, "lx", "lattice width must be at least 3");
  require(p.ly >= 3, "ly", "lattice height must be at least 3");
  require(p.t_max >= 0, "tmax", "must be non-negative");
  require(p.n_min >= 1, "nmin", "must be at least 1");
  require(p.n_min <= p.lx * p.ly, "nmin",
          "exceeds the number of lattice sites (" + std::to_string(p.lx * p.ly) + ")");
  const int n0 = initial_firm_count(p);
  require(n0 >= 1, "c", "c * lx * ly rounds to zero firms");
  require(n0 >= p.n_min, "nmin",
          "exceeds the initial firm count round(c * lx * ly) = " + std::to_string(n0));
}

std::vector<std::pair<std::string, std::string>> parameter_entries(const SimParams& p) {
  return {
      {"sigma", format_real(p.sigma)},
      {"s", format_real(p.s)},
      {"b", format_real(p.b)},
      {"nmin", std::to_string(p.n_min)},
      {"omega-s", format_real(p.omega_s)},
      {"c", format_real(p.c)},
      {"q", format_real(p.q)},
      {"policy", std::string(to_string(p.policy))},
      {"variant", std::string(to_string(p.variant))},
      {"lx", std::to_string(p.lx)},
      {"ly", std::to_string(p.ly)},
      {"tmax", std::to_string(p.t_max)},
      {"seed", std::to_string(p.seed)},
  };
}

std::uint64_t params_digest(const SimParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view text) {
    for (unsigned char ch : text) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [key, value] : parameter_entries(params)) {
    feed(key);
    feed("=");
    feed(value);
    feed("\n");
  }
  return h;
}

// ---------------------------------------------------------------------------
// Lattice

Lattice::Lattice(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw std::invalid_argument("lattice dimensions must be positive");
  const auto n = static_cast<std::size_t>(size());
  occupancy_.assign(n, kNoFirm);
  von_neumann_.resize(n);
  moore_.resize(n);
  auto wrap = [this](int x, int y) {
    x = (x % width_ + width_) % width_;
    y = (y % height_ + height_) % height_;
    return y * width_ + x;
  };
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const auto i = static_cast<std::size_t>(y * width_ + x);
      von_neumann_[i] = {wrap(x - 1, y), wrap(x + 1, y), wrap(x, y - 1), wrap(x, y + 1)};
      std::size_t k = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (dx != 0 || dy != 0) moore_[i][k++] = wrap(x + dx, y + dy);
    }
  }
}

int Lattice::index(Site s) const {
  if (!contains(s)) throw std::out_of_range("site outside lattice");
  return s.y * width_ + s.x;
}

Site Lattice::site(int index) const {
  if (index < 0 || index >= size()) throw std::out_of_range("site index outside lattice");
  return {index % width_, index / width_};
}

void Lattice::place(int index, FirmId id) {
  auto& slot = occupancy_.at(static_cast<std::size_t>(index));
  if (slot != kNoFirm) throw std::logic_error("site already occupied");
  slot = id;
  ++occupied_;
}

void Lattice::clear(int index) {
  auto& slot = occupancy_.at(static_cast<std::size_t>(index));
  if (slot == kNoFirm) throw std::logic_error("site already empty");
  slot = kNoFirm;
  --occupied_;
}

std::vector<Site> neighbors(const Lattice& lattice, Site site, Neighborhood kind) {
  const int i = lattice.index(site);
  std::vector<Site> out;
  if (kind == Neighborhood::VonNeumann4) {
    for (int n : lattice.von_neumann(i)) out.push_back(lattice.site(n));
  } else {
    for (int n : lattice.moore(i)) out.push_back(lattice.site(n));
  }
  return out;
}

// ---------------------------------------------------------------------------
// MarketState

MarketState::MarketState(Lattice lattice) : lattice_(std::move(lattice)) {}

const Firm& MarketState::firm(FirmId id) const {
  if (!alive(id)) throw std::logic_error("firm " + std::to_string(id) + " is not alive");
  return firms_[slot_of_[id]];
}

Firm& MarketState::mutable_firm(FirmId id) {
  if (!alive(id)) throw std::logic_error("firm " + std::to_string(id) + " is not alive");
  return firms_[slot_of_[id]];
}

FirmId MarketState::add_firm(int site, double tech, double share) {
  const FirmId id = next_id();
  lattice_.place(site, id);
  slot_of_.push_back(static_cast<std::uint32_t>(firms_.size()));
  firms_.push_back(Firm{id, tech, share, site});
  tech_sum_ += tech;
  tech_sq_sum_ += tech * tech;
  weighted_tech_sum_ += share * tech;
  return id;
}

void MarketState::remove_firm(FirmId id) {
  const Firm gone = firm(id);
  lattice_.clear(gone.site);
  const std::uint32_t slot = slot_of_[id];
  if (slot + 1 != firms_.size()) {
    firms_[slot] = firms_.back();
    slot_of_[firms_[slot].id] = slot;
  }
  firms_.pop_back();
  slot_of_[id] = kNoSlot;
  tech_sum_ -= gone.tech;
  tech_sq_sum_ -= gone.tech * gone.tech;
  weighted_tech_sum_ -= gone.share * gone.tech;
}

void MarketState::move_firm(FirmId id, int site) {
  Firm& f = mutable_firm(id);
  lattice_.place(site, id);
  lattice_.clear(f.site);
  f.site = site;
}

void MarketState::set_tech(FirmId id, double tech) {
  Firm& f = mutable_firm(id);
  tech_sum_ += tech - f.tech;
  tech_sq_sum_ += tech * tech - f.tech * f.tech;
  weighted_tech_sum_ += f.share * (tech - f.tech);
  f.tech = tech;
}

void MarketState::set_share(FirmId id, double share) {
  Firm& f = mutable_firm(id);
  weighted_tech_sum_ += (share - f.share) * f.tech;
  f.share = share;
}

void MarketState::add_to_all_shares(double delta) {
  for (Firm& f : firms_) f.share += delta;
  resync();
}

void MarketState::scale_all_shares(double factor) {
  for (Firm& f : firms_) f.share *= factor;
  resync();
}

double MarketState::share_sum() const {
  double sum = 0.0;
  for (const Firm& f : firms_) sum += f.share;
  return sum;
}

double MarketState::running_tech_sd() const {
  if (firms_.empty()) return 0.0;
  const double n = static_cast<double>(firms_.size());
  const double m = weighted_tech_sum_;
  // sum (A - m)^2 = S2 - 2 m S1 + n m^2
  const double var = (tech_sq_sum_ - 2.0 * m * tech_sum_) / n + m * m;
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

void MarketState::resync() {
  tech_sum_ = 0.0;
  tech_sq_sum_ = 0.0;
  weighted_tech_sum_ = 0.0;
  for (const Firm& f : firms_) {
    tech_sum_ += f.tech;
    tech_sq_sum_ += f.tech * f.tech;
    weighted_tech_sum_ += f.share * f.tech;
  }
}

void MarketState::set_clock(int sweep, double sigma) {
  sweep_ = sweep;
  frontier_value_ = frontier(sweep, sigma);
}

// ---------------------------------------------------------------------------
// Closed-form quantities

double frontier(double t, double sigma) { return std::exp(sigma * t); }

double weighted_mean_tech(const MarketState& market) {
  if (market.firm_count() == 0) throw std::logic_error("weighted_mean_tech of an empty market");
  double sum = 0.0;
  for (const Firm& f : market.firms()) sum += f.share * f.tech;
  return sum;
}

double population_sd_tech(const MarketState& market) {
  if (market.firm_count() == 0) throw std::logic_error("population_sd_tech of an empty market");
  const double mean = weighted_mean_tech(market);
  double sum = 0.0;
  for (const Firm& f : market.firms()) sum += (f.tech - mean) * (f.tech - mean);
  return std::sqrt(sum / static_cast<double>(market.firm_count()));
}

double survival_probability(double tech, double mean_tech, double frontier_value, double s) {
  // Low-technology phase compares against the mean-scaled frontier, the
  // high-technology phase against the frontier itself. Zero gap gives 1.
  const double gap = mean_tech < 1.0 ? mean_tech * frontier_value - tech : frontier_value - tech;
  return gap > 0.0 ? std::exp(-s * gap) : 1.0;
}

Segment classify_segment(double tech, double mean_tech, double sigma_g) {
  if (tech < mean_tech - sigma_g) return Segment::Low;
  if (tech > mean_tech + sigma_g) return Segment::High;
  return Segment::Medium;
}

bool policy_covers(PolicyKind policy, Segment segment) {
  switch (policy) {
    case PolicyKind::Egalitarian: return true;
    case PolicyKind::LowTech: return segment == Segment::Low;
    case PolicyKind::MediumTech: return segment == Segment::Medium;
    case PolicyKind::HighTech: return segment == Segment::High;
  }
  return false;
}

MarketState init_market(const SimParams& params, Rng& rng) {
  validate(params);
  MarketState market{Lattice(params.lx, params.ly)};
  const int sites = params.lx * params.ly;
  const int n0 = initial_firm_count(params);

  std::vector<int> order(static_cast<std::size_t>(sites));
  std::iota(order.begin(), order.end(), 0);
  for (int k = 0; k < n0; ++k) {
    const auto pick = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(sites - k)));
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick)]);
  }
  const double share = 1.0 / n0;
  for (int k = 0; k < n0; ++k) market.add_firm(order[static_cast<std::size_t>(k)], rng.uniform(), share);
  market.resync();
  market.set_clock(0, params.sigma);
  return market;
}

}  // namespace firmsim
