#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "doctest.h"
#include "proce/error.hpp"
#include "proce/moo.hpp"
#include "proce/rng.hpp"

using namespace proce;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.4142135623730951;

Population pop_of(const std::vector<std::array<double, 3>>& objectives) {
  Population pop;
  for (const auto& o : objectives) {
    Candidate c;
    c.objectives = ObjectiveVector{o[0], o[1], o[2]};
    pop.members.push_back(c);
  }
  return pop;
}

// Reference sort: front 1 = non-dominated members, peel, repeat. Quadratic
// and obviously correct; the library version must agree exactly.
std::vector<std::vector<std::size_t>> peel_fronts(const Population& pop) {
  std::vector<std::size_t> remaining(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) remaining[i] = i;
  std::vector<std::vector<std::size_t>> fronts;
  while (!remaining.empty()) {
    std::vector<std::size_t> front, rest;
    for (std::size_t i : remaining) {
      bool dominated = false;
      for (std::size_t j : remaining) {
        if (j != i && dominates(*pop.members[j].objectives,
                                *pop.members[i].objectives)) {
          dominated = true;
          break;
        }
      }
      (dominated ? rest : front).push_back(i);
    }
    fronts.push_back(front);
    remaining = rest;
  }
  return fronts;
}

Population random_population(std::size_t n, Rng& rng, int distinct_values) {
  std::vector<std::array<double, 3>> objs(n);
  for (auto& o : objs) {
    for (double& v : o) {
      // Coarse grid makes exact objective ties common, exercising the
      // "no worse everywhere, better somewhere" edge of dominance.
      v = double(rng.uniform_index(std::size_t(distinct_values)));
    }
  }
  return pop_of(objs);
}

}  // namespace

TEST_SUITE("moo") {

TEST_CASE("dominance needs no-worse everywhere and better somewhere") {
  const ObjectiveVector a{1.0, 1.0, 1.0};
  const ObjectiveVector b{2.0, 1.0, 1.0};
  const ObjectiveVector c{0.5, 2.0, 1.0};
  CHECK(dominates(a, b));
  CHECK_FALSE(dominates(b, a));
  CHECK_FALSE(dominates(a, a));        // equal vectors never dominate
  CHECK_FALSE(dominates(a, c));        // trade-off: incomparable
  CHECK_FALSE(dominates(c, a));
}

TEST_CASE("non-dominated sort matches the peel-off oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(30);
    const Population pop = random_population(n, rng, 4);
    const FrontPartition got = non_dominated_sort(pop);
    const auto want = peel_fronts(pop);
    REQUIRE(got.fronts.size() == want.size());
    for (std::size_t f = 0; f < want.size(); ++f) {
      CHECK(got.fronts[f] == want[f]);
    }
    // Partition property: disjoint and exhaustive.
    std::set<std::size_t> seen;
    for (const auto& front : got.fronts) {
      for (std::size_t i : front) CHECK(seen.insert(i).second);
    }
    CHECK(seen.size() == n);
  }
}

TEST_CASE("sort refuses unevaluated members") {
  Population pop = pop_of({{1, 1, 1}});
  pop.members.push_back(Candidate{});  // no objectives
  CHECK_THROWS_AS((void)non_dominated_sort(pop), proce::UsageError);
}

TEST_CASE("nearest-pair crowding: worked three-point front") {
  // Front {(0,1), (0.5,0.5), (1,0)} embedded with a constant third value.
  const Population pop =
      pop_of({{0.0, 1.0, 7.0}, {0.5, 0.5, 7.0}, {1.0, 0.0, 7.0}});
  const std::vector<double> d = crowding_distance(pop, {0, 1, 2});
  REQUIRE(d.size() == 3);
  // B's two nearest companions are A and C; their gap spans the whole range
  // on both live objectives and the constant one contributes zero:
  // sqrt(1^2 + 1^2 + 0) = sqrt(2).
  CHECK(d[1] == doctest::Approx(kSqrt2).epsilon(1e-12));
  // A's companions are B and C, half the range apart per live objective:
  // sqrt(0.25 + 0.25) = sqrt(1/2). C mirrors A.
  CHECK(d[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(d[2] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("nearest-pair crowding: four-point front, companion ties by order") {
  // A=(0,1), B=(0.25,0.75), C=(0.5,0.5), D=(1,0); third objective flat.
  // All coordinates dyadic, so every expected value is exact.
  const Population pop = pop_of({
      {0.00, 1.00, 0.0},
      {0.25, 0.75, 0.0},
      {0.50, 0.50, 0.0},
      {1.00, 0.00, 0.0},
  });
  const std::vector<double> d = crowding_distance(pop, {0, 1, 2, 3});
  // B's nearest companions tie (A and C, both 0.125 away squared); the tie
  // resolves to the earlier front position, giving the pair {A, C}:
  // sqrt(0.5^2 + 0.5^2) = sqrt(1/2).
  CHECK(d[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  // A, C and D each end up with a companion pair 0.25 apart per objective.
  CHECK(d[0] == doctest::Approx(std::sqrt(0.125)).epsilon(1e-12));
  CHECK(d[2] == doctest::Approx(std::sqrt(0.125)).epsilon(1e-12));
  CHECK(d[3] == doctest::Approx(std::sqrt(0.125)).epsilon(1e-12));
}

TEST_CASE("crowding edge cases: tiny fronts and degenerate objectives") {
  const Population pop = pop_of({{0, 1, 0}, {1, 0, 0}, {0.5, 0.5, 0}});
  CHECK(crowding_distance(pop, {0}) == std::vector<double>{kInf});
  CHECK(crowding_distance(pop, {0, 1}) == std::vector<double>{kInf, kInf});

  // All three objectives constant across the front: every term is 0.
  const Population flat = pop_of({{3, 3, 3}, {3, 3, 3}, {3, 3, 3}});
  const std::vector<double> d = crowding_distance(flat, {0, 1, 2});
  CHECK(d == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("standard crowding: boundary infinities and interior spans") {
  // Classic form on the same three-point front: boundaries get +inf, the
  // middle gets the normalized neighbor span summed per objective.
  const Population pop =
      pop_of({{0.0, 1.0, 7.0}, {0.5, 0.5, 7.0}, {1.0, 0.0, 7.0}});
  const std::vector<double> d = crowding_distance(pop, {0, 1, 2}, true);
  CHECK(d[0] == kInf);
  CHECK(d[2] == kInf);
  // (1-0)/1 on the first objective + (1-0)/1 on the second + 0 on the flat.
  CHECK(d[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("environmental selection keeps whole fronts, truncates by crowding") {
  // Front 1: three mutually non-dominated members. Front 2: dominated ones.
  Population merged = pop_of({
      {0.0, 1.0, 0.0},   // 0: front 1
      {2.0, 2.0, 2.0},   // 1: front 2
      {0.5, 0.5, 0.0},   // 2: front 1
      {1.0, 0.0, 0.0},   // 3: front 1
      {3.0, 3.0, 3.0},   // 4: front 3
  });
  const Population kept = environmental_selection(merged, 4);
  REQUIRE(kept.size() == 4);
  // All of front 1 fits (3 members), then the best of front 2.
  std::multiset<double> first;
  for (int i = 0; i < 3; ++i) {
    CHECK(kept.members[i].rank == std::size_t(1));
    first.insert(kept.members[i].objectives->pred);
  }
  CHECK(first == std::multiset<double>{0.0, 0.5, 1.0});
  CHECK(kept.members[3].rank == std::size_t(2));
  CHECK(kept.members[3].objectives->pred == 2.0);
  for (const Candidate& c : kept.members) {
    CHECK(c.crowding.has_value());
  }

  // Exact fit keeps everything; selecting more than exist is rejected.
  CHECK(environmental_selection(merged, 5).size() == 5);
  CHECK(environmental_selection(merged, 0).size() == 0);
  CHECK_THROWS_AS((void)environmental_selection(merged, 6), proce::UsageError);
}

TEST_CASE("straddling-front truncation prefers high crowding, ties by index") {
  // The dyadic four-point front again: crowding sqrt(1/2) for B, sqrt(1/8)
  // for A, C and D (exactly equal). Truncating to 2 keeps B on crowding and
  // then A on the original-index tie-break, emitted in index order.
  Population line = pop_of({
      {0.00, 1.00, 0.0},
      {0.25, 0.75, 0.0},
      {0.50, 0.50, 0.0},
      {1.00, 0.00, 0.0},
  });
  const Population trimmed = environmental_selection(line, 2);
  REQUIRE(trimmed.size() == 2);
  CHECK(trimmed.members[0].objectives->pred == 0.0);   // A
  CHECK(trimmed.members[1].objectives->pred == 0.25);  // B
  CHECK(*trimmed.members[0].rank == 1);
  CHECK(*trimmed.members[1].rank == 1);
  CHECK(*trimmed.members[1].crowding ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  // Degenerate front of identical members: crowding ties at 0, so the
  // lowest original indices survive; repeat runs agree exactly.
  Population same = pop_of({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
  const Population kept = environmental_selection(same, 2);
  const Population again = environmental_selection(same, 2);
  REQUIRE(kept.size() == 2);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    CHECK(kept.members[i].objectives->pred ==
          again.members[i].objectives->pred);
    CHECK(*kept.members[i].crowding == 0.0);
  }
}

TEST_CASE("selection against the oracle on random populations") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(20);
    const Population pop = random_population(n, rng, 5);
    const std::size_t keep = 1 + rng.uniform_index(n);
    const Population kept = environmental_selection(pop, keep);
    REQUIRE(kept.size() == keep);

    // Count how many whole fronts fit; every kept rank-r member with
    // r < straddling front must appear in full.
    const auto fronts = peel_fronts(pop);
    std::size_t used = 0, f = 0;
    while (f < fronts.size() && used + fronts[f].size() <= keep) {
      used += fronts[f].size();
      ++f;
    }
    std::size_t whole = 0;
    for (const Candidate& c : kept.members) {
      REQUIRE(c.rank.has_value());
      if (*c.rank <= f) ++whole;
      CHECK(*c.rank <= f + 1);
    }
    CHECK(whole == used);
  }
}

TEST_CASE("crossover swaps mutable genes only, honoring the probability") {
  FeatureSchema schema;
  schema.features = {
      Feature{"u", FeatureKind::kContinuous, {}, true, ConstraintKind::kNone},
      Feature{"lock", FeatureKind::kContinuous, {}, false,
              ConstraintKind::kNone},
      Feature{"c", FeatureKind::kCategorical, {"p", "q"}, true,
              ConstraintKind::kNone},
  };
  Rng rng(31);
  int swapped_u = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    Candidate a, b;
    a.genes = {0.1, 5.0, 0.0};
    b.genes = {0.9, 7.0, 1.0};
    a.objectives = ObjectiveVector{};  // must be cleared by variation
    crossover(a, b, schema, 1.0, rng);
    CHECK(a.genes[1] == 5.0);  // immutable gene never crosses
    CHECK(b.genes[1] == 7.0);
    // Gene multiset is preserved: values only ever swap.
    CHECK(((a.genes[0] == 0.1 && b.genes[0] == 0.9) ||
           (a.genes[0] == 0.9 && b.genes[0] == 0.1)));
    if (a.genes[0] == 0.9) ++swapped_u;
    CHECK_FALSE(a.objectives.has_value());
  }
  // Uniform crossover swaps each gene with probability 1/2.
  CHECK(swapped_u > 850);
  CHECK(swapped_u < 1150);

  // probability 0: never touches anything.
  Candidate a, b;
  a.genes = {0.1, 5.0, 0.0};
  b.genes = {0.9, 7.0, 1.0};
  crossover(a, b, schema, 0.0, rng);
  CHECK(a.genes == std::vector<double>{0.1, 5.0, 0.0});
  CHECK(b.genes == std::vector<double>{0.9, 7.0, 1.0});
}

TEST_CASE("mutation clamps continuous genes and resamples categories") {
  FeatureSchema schema;
  schema.features = {
      Feature{"u", FeatureKind::kContinuous, {}, true, ConstraintKind::kNone},
      Feature{"lock", FeatureKind::kCategorical, {"p", "q"}, false,
              ConstraintKind::kNone},
      Feature{"c", FeatureKind::kCategorical, {"p", "q", "r"}, true,
              ConstraintKind::kNone},
  };
  GaConfig cfg;
  cfg.mutation_prob = 1.0;
  cfg.mutation_sigma = 0.5;
  Rng rng(37);
  int cat_changes = 0;
  std::set<double> cat_values;
  for (int trial = 0; trial < 1000; ++trial) {
    Candidate c;
    c.genes = {0.95, 1.0, 2.0};
    c.objectives = ObjectiveVector{};
    mutate(c, schema, cfg, rng);
    CHECK(c.genes[0] >= 0.0);
    CHECK(c.genes[0] <= 1.0);
    CHECK(c.genes[1] == 1.0);  // immutable categorical untouched
    // Resampling picks among the OTHER categories, so 2.0 cannot persist.
    CHECK(c.genes[2] != 2.0);
    cat_values.insert(c.genes[2]);
    if (c.genes[2] != 2.0) ++cat_changes;
    CHECK_FALSE(c.objectives.has_value());
  }
  CHECK(cat_changes == 1000);
  CHECK(cat_values == std::set<double>{0.0, 1.0});

  // probability 0 leaves the candidate alone.
  GaConfig still;
  still.mutation_prob = 0.0;
  Candidate c;
  c.genes = {0.5, 1.0, 2.0};
  mutate(c, schema, still, rng);
  CHECK(c.genes == std::vector<double>{0.5, 1.0, 2.0});
}

TEST_CASE("ga config rejects nonsense") {
  GaConfig cfg;
  cfg.validate();
  GaConfig zero_pop = cfg;
  zero_pop.population_size = 0;
  CHECK_THROWS_AS(zero_pop.validate(), proce::ConfigError);
  GaConfig bad_prob = cfg;
  bad_prob.crossover_prob = 1.5;
  CHECK_THROWS_AS(bad_prob.validate(), proce::ConfigError);
  GaConfig bad_sigma = cfg;
  bad_sigma.mutation_sigma = -0.1;
  CHECK_THROWS_AS(bad_sigma.validate(), proce::ConfigError);
}

}  // TEST_SUITE
