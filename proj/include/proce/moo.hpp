#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "proce/data.hpp"
#include "proce/objectives.hpp"
#include "proce/rng.hpp"

namespace proce {

// One member of the genetic population. Genes share the instance layout:
// a real in [0,1] per continuous feature, a category index per categorical
// feature; immutable features always carry the original's value.
struct Candidate {
  std::vector<double> genes;
  std::optional<ObjectiveVector> objectives;
  std::optional<std::size_t> rank;  // 1-based front index
  std::optional<double> crowding;
};

struct Population {
  std::vector<Candidate> members;

  std::size_t size() const { return members.size(); }
};

// Disjoint, exhaustive fronts F_1..F_H as candidate-index lists, each in
// ascending original-index order.
struct FrontPartition {
  std::vector<std::vector<std::size_t>> fronts;
};

struct GaConfig {
  std::size_t population_size = 100;
  std::size_t generations = 100;
  double crossover_prob = 0.9;
  double mutation_prob = 0.2;   // per gene
  double mutation_sigma = 0.1;  // continuous genes
  double init_sigma = 0.1;      // spread of the initial population
  double init_cat_keep_prob = 0.8;
  std::uint64_t seed = 0;
  // Classic sorted-neighbor crowding instead of the nearest-pair form.
  bool standard_crowding = false;
  // Stop once the selected candidate is valid and unchanged for 10
  // consecutive generations.
  bool early_stop = false;

  void validate() const;
};

// True iff `a` is no worse than `b` on every objective and strictly better
// on at least one (all objectives minimized).
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

// Fast non-dominated sort; requires every member evaluated.
FrontPartition non_dominated_sort(const Population& pop);

// Crowding distance for one front. The default form scores each member by
// its two nearest front companions in objective space:
//   d(x) = sqrt( sum_i ((f_i(a) - f_i(b)) / (f_i^min - f_i^max))^2 )
// with fronts of size <= 2 scored +inf and degenerate objectives (min = max
// over the front) contributing 0. `standard` switches to the classic
// per-objective sorted-neighbor span.
std::vector<double> crowding_distance(const Population& pop,
                                      const std::vector<std::size_t>& front,
                                      bool standard = false);

// Keeps n members: whole fronts in order while they fit, then the straddling
// front truncated by descending crowding distance (ties by original index).
// Annotates rank and crowding on the survivors.
Population environmental_selection(const Population& merged, std::size_t n,
                                   bool standard_crowding = false);

// With probability crossover_prob, uniformly swaps genes between the pair
// (each gene with probability 0.5); mutable genes only.
void crossover(Candidate& a, Candidate& b, const FeatureSchema& schema,
               double crossover_prob, Rng& rng);

// Per mutable gene with probability cfg.mutation_prob: continuous genes get
// N(0, mutation_sigma^2) noise then clamp to [0,1]; categorical genes
// resample uniformly among the other categories.
void mutate(Candidate& c, const FeatureSchema& schema, const GaConfig& cfg,
            Rng& rng);

}  // namespace proce
