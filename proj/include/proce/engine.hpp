#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "proce/causal.hpp"
#include "proce/data.hpp"
#include "proce/models.hpp"
#include "proce/moo.hpp"
#include "proce/objectives.hpp"

namespace proce {

// One explanation job. x_org lives in normalized space.
struct ExplainRequest {
  Instance x_org;
  int y_org = 0;
  int y_cf = 1;
  GaConfig ga;
  std::size_t k_neighbors = 25;

  void validate() const;
};

// Everything the search needs, trained against one schema.
struct ModelBundle {
  FeatureSchema schema;
  Classifier classifier;
  Autoencoder autoencoder;
  StructuralModel scm;
  Dataset train;  // normalized rows backing the K-NN prototype
  // Latent code per training row; fill via build_latent_cache() to avoid
  // re-encoding the dataset on every request.
  std::vector<std::vector<double>> latents;

  void validate() const;
  void build_latent_cache();
};

struct FeatureDelta {
  std::string feature;
  // Raw-space values; categorical features carry their labels instead.
  double from_value = 0.0;
  double to_value = 0.0;
  std::string from_label;
  std::string to_label;
  bool is_categorical = false;
  bool changed = false;
};

struct ExplanationReport {
  Instance x_org_norm;
  Instance x_cf_norm;
  Instance x_org_raw;  // denormalized view (equals *_norm without a scaler)
  Instance x_cf_raw;
  int y_org = 0;
  int y_cf = 1;
  ObjectiveVector objectives;
  bool valid = false;  // H(x_cf) rounds to y_cf at threshold 0.5
  std::size_t generations_run = 0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  std::vector<FeatureDelta> deltas;
};

// Seeded population around the original: continuous genes drawn from
// N(x_org_j, init_sigma^2) clamped to [0,1], categorical genes keep the
// original with probability init_cat_keep_prob; x_org injected as member 0.
Population init_population(const Instance& x_org, const FeatureSchema& schema,
                           const GaConfig& ga, Rng& rng);

// Gene vector -> instance: clamps continuous genes to [0,1], restores
// immutable features from x_org, validates category indices.
Instance decode(const Candidate& c, const FeatureSchema& schema,
                const Instance& x_org);

struct FinalSelection {
  std::size_t index = 0;
  bool valid = false;
};

// Among the first front: prefer candidates the classifier already assigns to
// y_cf, then minimal combined distance, then minimal prediction loss, then
// lowest index. Without any valid member the front's first member is
// returned and the selection is flagged invalid.
FinalSelection select_final(const Population& pop, const FrontPartition& fronts,
                            const Classifier& clf, const FeatureSchema& schema,
                            const Instance& x_org, int y_cf);

// The full generational search: prototype construction, G generations of
// merge/evaluate/sort/select/vary, then final selection into a report.
ExplanationReport run_proce(const ExplainRequest& request,
                            const ModelBundle& bundle);

}  // namespace proce
