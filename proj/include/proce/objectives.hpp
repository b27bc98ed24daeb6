#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "proce/causal.hpp"
#include "proce/data.hpp"
#include "proce/models.hpp"

namespace proce {

// The three search objectives, all minimized.
struct ObjectiveVector {
  double pred = 0.0;        // cross-entropy against the target class
  double proto = 0.0;       // squared latent distance to the class prototype
  double dist_final = 0.0;  // causality-aware proximity to the original

  std::array<double, 3> as_array() const { return {pred, proto, dist_final}; }
};

// Latent-space prototype of the counterfactual class.
struct PrototypeContext {
  std::vector<double> proto;                 // length E
  std::size_t k = 0;
  std::vector<std::size_t> neighbor_indices;  // rows of the training data
  int y_org = 0;
  int y_cf = 1;
};

// Indices of the K rows with class != y_org whose latent codes lie closest
// to Q(x_org); ties broken by lowest row index. `latents` may supply
// precomputed codes for every dataset row.
std::vector<std::size_t> knn_counterfactual_class(
    const Dataset& data, const Autoencoder& ae, const Instance& x_org,
    int y_org, std::size_t k,
    const std::vector<std::vector<double>>* latents = nullptr);

// Component-wise mean latent code over the neighbor rows.
std::vector<double> compute_prototype(
    const Dataset& data, const Autoencoder& ae,
    const std::vector<std::size_t>& neighbor_indices,
    const std::vector<std::vector<double>>* latents = nullptr);

PrototypeContext build_prototype_context(
    const Dataset& data, const Autoencoder& ae, const Instance& x_org,
    int y_org, int y_cf, std::size_t k,
    const std::vector<std::vector<double>>* latents = nullptr);

// Cross-entropy of the classifier's output against the target class.
double f_pred(const Classifier& clf, const Instance& x_cf, int y_cf);

// Squared distance between the candidate's latent code and the prototype.
double f_proto(const Autoencoder& ae, const FeatureSchema& schema,
               const Instance& x_cf, const std::vector<double>& proto);

// Mixed feature-space distance over all features (no causal terms).
double f_dist(const Autoencoder& ae, const FeatureSchema& schema,
              const Instance& x_cf, const Instance& x_org);

// Everything needed to score one candidate; owns nothing.
struct EvalContext {
  const Classifier* classifier = nullptr;
  const Autoencoder* ae = nullptr;
  const StructuralModel* scm = nullptr;
  const FeatureSchema* schema = nullptr;
  const std::vector<double>* proto = nullptr;
  const Instance* x_org = nullptr;
  int y_cf = 1;

  void validate() const;
};

ObjectiveVector evaluate_objectives(const EvalContext& ctx,
                                    const Instance& candidate);

}  // namespace proce
