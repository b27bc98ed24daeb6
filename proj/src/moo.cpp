#include "proce/moo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "proce/error.hpp"

namespace proce {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const ObjectiveVector& objectives_of(const Population& pop, std::size_t i) {
  if (!pop.members[i].objectives.has_value()) {
    throw UsageError("candidate " + std::to_string(i) +
                     " has no evaluated objectives");
  }
  return *pop.members[i].objectives;
}

// Eq.-style nearest-pair crowding; see the header for the formula.
std::vector<double> nearest_pair_crowding(const Population& pop,
                                          const std::vector<std::size_t>& front) {
  const std::size_t m = front.size();
  std::vector<double> result(m, kInf);
  if (m <= 2) return result;

  std::array<double, 3> f_min = objectives_of(pop, front[0]).as_array();
  std::array<double, 3> f_max = f_min;
  for (std::size_t i = 1; i < m; ++i) {
    const auto f = objectives_of(pop, front[i]).as_array();
    for (std::size_t k = 0; k < f.size(); ++k) {
      f_min[k] = std::min(f_min[k], f[k]);
      f_max[k] = std::max(f_max[k], f[k]);
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    const auto fi = objectives_of(pop, front[i]).as_array();
    // Two nearest same-front companions by Euclidean distance in objective
    // space; distance ties resolve to the earlier front position.
    std::size_t best_a = m, best_b = m;
    double dist_a = kInf, dist_b = kInf;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const auto fj = objectives_of(pop, front[j]).as_array();
      double d = 0.0;
      for (std::size_t k = 0; k < fi.size(); ++k) {
        const double gap = fi[k] - fj[k];
        d += gap * gap;
      }
      if (d < dist_a) {
        dist_b = dist_a;
        best_b = best_a;
        dist_a = d;
        best_a = j;
      } else if (d < dist_b) {
        dist_b = d;
        best_b = j;
      }
    }
    const auto fa = objectives_of(pop, front[best_a]).as_array();
    const auto fb = objectives_of(pop, front[best_b]).as_array();
    double sum = 0.0;
    for (std::size_t k = 0; k < fa.size(); ++k) {
      if (f_min[k] == f_max[k]) continue;  // degenerate objective
      const double term = (fa[k] - fb[k]) / (f_min[k] - f_max[k]);
      sum += term * term;
    }
    result[i] = std::sqrt(sum);
  }
  return result;
}

// Classic NSGA-II crowding: per-objective sorted-neighbor span.
std::vector<double> sorted_neighbor_crowding(
    const Population& pop, const std::vector<std::size_t>& front) {
  const std::size_t m = front.size();
  std::vector<double> result(m, 0.0);
  if (m <= 2) {
    std::fill(result.begin(), result.end(), kInf);
    return result;
  }
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return objectives_of(pop, front[a]).as_array()[k] <
                              objectives_of(pop, front[b]).as_array()[k];
                     });
    const double lo = objectives_of(pop, front[order.front()]).as_array()[k];
    const double hi = objectives_of(pop, front[order.back()]).as_array()[k];
    if (lo == hi) continue;
    result[order.front()] = kInf;
    result[order.back()] = kInf;
    for (std::size_t i = 1; i + 1 < m; ++i) {
      const double prev =
          objectives_of(pop, front[order[i - 1]]).as_array()[k];
      const double next =
          objectives_of(pop, front[order[i + 1]]).as_array()[k];
      result[order[i]] += (next - prev) / (hi - lo);
    }
  }
  return result;
}

}  // namespace

void GaConfig::validate() const {
  if (population_size < 4 || population_size % 2 != 0) {
    throw ConfigError("population size must be even and at least 4");
  }
  for (double p : {crossover_prob, mutation_prob, init_cat_keep_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("probabilities must lie in [0, 1]");
    }
  }
  if (mutation_sigma < 0.0 || init_sigma < 0.0) {
    throw ConfigError("sigmas must be non-negative");
  }
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  const auto fa = a.as_array();
  const auto fb = b.as_array();
  bool strictly_better = false;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    if (fa[i] > fb[i]) return false;
    if (fa[i] < fb[i]) strictly_better = true;
  }
  return strictly_better;
}

FrontPartition non_dominated_sort(const Population& pop) {
  const std::size_t n = pop.size();
  // Deb's fast sort: count dominators and track dominated sets.
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> dominator_count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const ObjectiveVector& oi = objectives_of(pop, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const ObjectiveVector& oj = objectives_of(pop, j);
      if (dominates(oi, oj)) {
        dominated[i].push_back(j);
        dominator_count[j] += 1;
      } else if (dominates(oj, oi)) {
        dominated[j].push_back(i);
        dominator_count[i] += 1;
      }
    }
  }
  FrontPartition partition;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    if (dominator_count[i] == 0) current.push_back(i);
  }
  while (!current.empty()) {
    partition.fronts.push_back(current);
    std::vector<std::size_t> next;
    for (std::size_t i : current) {
      for (std::size_t j : dominated[i]) {
        if (--dominator_count[j] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return partition;
}

std::vector<double> crowding_distance(const Population& pop,
                                      const std::vector<std::size_t>& front,
                                      bool standard) {
  if (front.empty()) throw UsageError("crowding over an empty front");
  return standard ? sorted_neighbor_crowding(pop, front)
                  : nearest_pair_crowding(pop, front);
}

Population environmental_selection(const Population& merged, std::size_t n,
                                   bool standard_crowding) {
  if (merged.size() < n) {
    throw UsageError("cannot select " + std::to_string(n) + " members from " +
                     std::to_string(merged.size()));
  }
  const FrontPartition partition = non_dominated_sort(merged);
  Population out;
  out.members.reserve(n);
  for (std::size_t h = 0; h < partition.fronts.size() && out.size() < n; ++h) {
    const std::vector<std::size_t>& front = partition.fronts[h];
    const std::vector<double> crowd =
        crowding_distance(merged, front, standard_crowding);
    auto admit = [&](std::size_t pos) {
      Candidate c = merged.members[front[pos]];
      c.rank = h + 1;
      c.crowding = crowd[pos];
      out.members.push_back(std::move(c));
    };
    if (out.size() + front.size() <= n) {
      for (std::size_t pos = 0; pos < front.size(); ++pos) admit(pos);
      continue;
    }
    // Straddling front: best crowding first, ties by original index.
    std::vector<std::size_t> order(front.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (crowd[a] != crowd[b]) return crowd[a] > crowd[b];
      return front[a] < front[b];
    });
    const std::size_t need = n - out.size();
    std::vector<std::size_t> picked(order.begin(), order.begin() + need);
    // Keep the output population in original-index order for stability.
    std::sort(picked.begin(), picked.end());
    for (std::size_t pos : picked) admit(pos);
  }
  return out;
}

void crossover(Candidate& a, Candidate& b, const FeatureSchema& schema,
               double crossover_prob, Rng& rng) {
  if (a.genes.size() != schema.size() || b.genes.size() != schema.size()) {
    throw ShapeError("candidate gene layout does not match schema");
  }
  if (!rng.bernoulli(crossover_prob)) return;
  for (std::size_t g = 0; g < schema.size(); ++g) {
    if (!schema.at(g).is_mutable) continue;  // both hold x_org's value anyway
    if (rng.bernoulli(0.5)) std::swap(a.genes[g], b.genes[g]);
  }
  a.objectives.reset();
  b.objectives.reset();
}

void mutate(Candidate& c, const FeatureSchema& schema, const GaConfig& cfg,
            Rng& rng) {
  if (c.genes.size() != schema.size()) {
    throw ShapeError("candidate gene layout does not match schema");
  }
  for (std::size_t g = 0; g < schema.size(); ++g) {
    const Feature& f = schema.at(g);
    if (!f.is_mutable) continue;
    if (!rng.bernoulli(cfg.mutation_prob)) continue;
    if (f.kind == FeatureKind::kContinuous) {
      c.genes[g] = std::clamp(c.genes[g] + rng.normal(0.0, cfg.mutation_sigma),
                              0.0, 1.0);
    } else {
      // Uniform over the categories other than the current one.
      const auto n_cats = f.categories.size();
      const auto cur = static_cast<std::size_t>(c.genes[g]);
      std::size_t pick = rng.uniform_index(n_cats - 1);
      if (pick >= cur) ++pick;
      c.genes[g] = static_cast<double>(pick);
    }
    c.objectives.reset();
  }
}

}  // namespace proce
