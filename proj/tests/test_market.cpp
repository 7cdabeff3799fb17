#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "firmsim/market.hpp"
#include "test_support.hpp"

using namespace firmsim;
using firmsim::testing::make_market;

TEST_CASE("frontier grows exponentially per sweep") {
  CHECK(frontier(0, 0.01) == 1.0);
  CHECK(frontier(100, 0.01) == doctest::Approx(2.718281828459045).epsilon(1e-15));
  CHECK(frontier(220, 0.01) == doctest::Approx(9.025013499434122).epsilon(1e-15));

  for (int t = 0; t < 3000; t += 7) {
    const double step = frontier(t + 1, 0.01) / frontier(t, 0.01);
    CHECK(std::abs(step / std::exp(0.01) - 1.0) <= 1e-12);
    CHECK(frontier(t + 1, 0.01) > frontier(t, 0.01));
  }
}

TEST_CASE("weighted mean technology") {
  CHECK(weighted_mean_tech(make_market(5, 5, {{{0, 0}, 0.2, 0.5}, {{2, 2}, 0.4, 0.5}})) ==
        doctest::Approx(0.3).epsilon(1e-15));
  CHECK(weighted_mean_tech(make_market(5, 5, {{{1, 1}, 0.7, 1.0}})) == 0.7);
  CHECK(weighted_mean_tech(make_market(5, 5, {{{0, 0}, 0.0, 0.9}, {{3, 3}, 1.0, 0.1}})) ==
        doctest::Approx(0.1).epsilon(1e-15));

  MarketState empty{Lattice(4, 4)};
  CHECK_THROWS_AS(weighted_mean_tech(empty), std::logic_error);
}

TEST_CASE("population SD mixes the weighted mean with unweighted deviations") {
  CHECK(population_sd_tech(make_market(5, 5, {{{0, 0}, 0.3, 1.0}})) == 0.0);
  CHECK(population_sd_tech(make_market(5, 5, {{{0, 0}, 0.4, 0.3}, {{1, 0}, 0.4, 0.3}, {{2, 0}, 0.4, 0.4}})) ==
        doctest::Approx(0.0).epsilon(1e-15));
  CHECK(population_sd_tech(make_market(5, 5, {{{0, 0}, 0.0, 0.5}, {{2, 2}, 1.0, 0.5}})) ==
        doctest::Approx(0.5).epsilon(1e-15));

  // Unequal shares: mean 0.1, deviations {0.1, 0.9} -> sqrt((0.01 + 0.81) / 2).
  CHECK(population_sd_tech(make_market(5, 5, {{{0, 0}, 0.0, 0.9}, {{2, 2}, 1.0, 0.1}})) ==
        doctest::Approx(std::sqrt(0.41)).epsilon(1e-14));
}

TEST_CASE("survival probability, both phases") {
  // Low phase, tech at or above mean * frontier.
  CHECK(survival_probability(0.5, 0.5, 1.0, 1.0) == 1.0);
  CHECK(survival_probability(0.9, 0.5, 1.5, 1.0) == 1.0);
  CHECK(survival_probability(0.2, 0.5, 1.0, 1.0) == doctest::Approx(0.7408182206817179).epsilon(1e-15));
  CHECK(survival_probability(1.0, 1.2, 2.0, 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  // High phase compares with the frontier itself, not mean * frontier.
  CHECK(survival_probability(2.0, 1.2, 2.0, 1.0) == 1.0);
  CHECK(survival_probability(1.9, 1.0, 2.0, 3.0) == doctest::Approx(std::exp(-0.3)).epsilon(1e-13));
}

TEST_CASE("segment classification") {
  CHECK(classify_segment(0.5, 0.5, 0.1) == Segment::Medium);
  CHECK(classify_segment(0.5 - 1.5 * 0.1, 0.5, 0.1) == Segment::Low);
  CHECK(classify_segment(0.5 + 1.5 * 0.1, 0.5, 0.1) == Segment::High);
  CHECK(classify_segment(0.75, 0.5, 0.25) == Segment::Medium);
  CHECK(classify_segment(0.25, 0.5, 0.25) == Segment::Medium);
  CHECK(classify_segment(0.5, 0.5, 0.0) == Segment::Medium);
  CHECK(classify_segment(0.49, 0.5, 0.0) == Segment::Low);
  CHECK(classify_segment(0.51, 0.5, 0.0) == Segment::High);

  CHECK(policy_covers(PolicyKind::Egalitarian, Segment::Low));
  CHECK(policy_covers(PolicyKind::Egalitarian, Segment::High));
  CHECK(policy_covers(PolicyKind::LowTech, Segment::Low));
  CHECK_FALSE(policy_covers(PolicyKind::LowTech, Segment::Medium));
  CHECK(policy_covers(PolicyKind::MediumTech, Segment::Medium));
  CHECK_FALSE(policy_covers(PolicyKind::HighTech, Segment::Medium));
}

TEST_CASE("neighbors under periodic boundaries") {
  const Lattice lattice(10, 10);
  const auto vn = neighbors(lattice, {0, 0}, Neighborhood::VonNeumann4);
  CHECK(vn == std::vector<Site>{{9, 0}, {1, 0}, {0, 9}, {0, 1}});

  const auto moore = neighbors(lattice, {5, 5}, Neighborhood::Moore8);
  CHECK(moore == std::vector<Site>{{4, 4}, {5, 4}, {6, 4}, {4, 5}, {6, 5}, {4, 6}, {5, 6}, {6, 6}});

  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      const auto v = neighbors(lattice, {x, y}, Neighborhood::VonNeumann4);
      const auto m = neighbors(lattice, {x, y}, Neighborhood::Moore8);
      std::set<int> vs, ms;
      for (Site s : v) vs.insert(lattice.index(s));
      for (Site s : m) ms.insert(lattice.index(s));
      CHECK(vs.size() == 4);
      CHECK(ms.size() == 8);
      CHECK(std::includes(ms.begin(), ms.end(), vs.begin(), vs.end()));
      CHECK(ms.count(lattice.index({x, y})) == 0);
    }
  }

  CHECK_THROWS_AS(neighbors(lattice, {10, 0}, Neighborhood::Moore8), std::out_of_range);
  CHECK_THROWS_AS(neighbors(lattice, {0, -1}, Neighborhood::VonNeumann4), std::out_of_range);
}

TEST_CASE("init_market places round(c * lx * ly) firms with equal shares") {
  SimParams p;
  Rng rng(7);
  MarketState m = init_market(p, rng);
  CHECK(m.firm_count() == 80);
  CHECK(m.lattice().occupied_count() == 80);
  CHECK(m.sweep() == 0);
  CHECK(m.frontier_value() == 1.0);
  for (const Firm& f : m.firms()) {
    CHECK(f.share == 0.0125);
    CHECK(f.tech >= 0.0);
    CHECK(f.tech < 1.0);
  }
  CHECK(std::abs(m.share_sum() - 1.0) <= 1e-12);
  CHECK(firmsim::testing::occupancy_consistent(m));

  p.c = 1.0;
  Rng rng2(8);
  CHECK(init_market(p, rng2).lattice().occupied_count() == 100);
}

TEST_CASE("initial mean technology is 0.5 within 3 standard errors") {
  // Each initial <A(0)> is the mean of 80 U[0,1) draws: variance 1/(12*80).
  SimParams p;
  constexpr int kInits = 400;
  double sum = 0.0;
  for (int k = 0; k < kInits; ++k) {
    Rng rng(derive_replica_seed(99, static_cast<std::uint64_t>(k)));
    sum += weighted_mean_tech(init_market(p, rng));
  }
  const double se = std::sqrt(1.0 / (12.0 * 80.0 * kInits));
  CHECK(std::abs(sum / kInits - 0.5) <= 3.0 * se);
}

TEST_CASE("parameter validation names the offending key") {
  auto key_of = [](SimParams p) -> std::string {
    try {
      validate(p);
    } catch (const InvalidParameter& e) {
      return e.key();
    }
    return "";
  };
  SimParams ok;
  CHECK(key_of(ok).empty());

  SimParams p = ok;
  p.q = 1.5;
  CHECK(key_of(p) == "q");
  p = ok;
  p.b = -0.1;
  CHECK(key_of(p) == "b");
  p = ok;
  p.n_min = 101;
  CHECK(key_of(p) == "nmin");
  p = ok;
  p.n_min = 90;  // above round(0.8 * 100)
  CHECK(key_of(p) == "nmin");
  p = ok;
  p.c = 0.004;
  CHECK(key_of(p) == "c");
  p = ok;
  p.omega_s = 1.0;
  CHECK(key_of(p) == "omega-s");
  p = ok;
  p.lx = 2;
  CHECK(key_of(p) == "lx");
  p = ok;
  p.t_max = -1;
  CHECK(key_of(p) == "tmax");

  Rng rng(1);
  p = ok;
  p.c = 0.004;
  CHECK_THROWS_AS(init_market(p, rng), InvalidParameter);
}

TEST_CASE("running moments agree with full recomputation") {
  Rng rng(4242);
  for (int trial = 0; trial < 200; ++trial) {
    MarketState m = firmsim::testing::random_market(rng);
    for (int k = 0; k < 20 && m.firm_count() > 1; ++k) {
      const Firm f = m.firms()[rng.below(m.firm_count())];
      switch (rng.below(3)) {
        case 0: m.set_tech(f.id, f.tech + rng.uniform()); break;
        case 1: m.set_share(f.id, f.share * rng.uniform()); break;
        default: m.remove_firm(f.id); break;
      }
    }
    CHECK(m.running_weighted_tech() == doctest::Approx(weighted_mean_tech(m)).epsilon(1e-12));
    CHECK(m.running_tech_sd() == doctest::Approx(population_sd_tech(m)).epsilon(1e-9));
  }
}
