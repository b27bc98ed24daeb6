#pragma once

#include <string>
#include <utility>
#include <vector>

#include "proce/data.hpp"
#include "proce/models.hpp"

namespace proce {

// Directed graph over feature names; an edge (parent, child) asserts that
// `parent` is a direct cause of `child`.
struct CausalGraph {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;

  std::vector<std::string> parents_of(const std::string& node) const;
};

// Checks the graph is a DAG over known, unique nodes and returns a
// topological order. Throws DataError naming a cycle when one exists.
std::vector<std::string> validate_dag(const CausalGraph& graph);

// v = intercept + sum_i coefficients[i] * parent_i, fitted least-squares.
struct StructuralEquation {
  std::string child;
  std::vector<std::string> parents;
  std::vector<double> coefficients;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool ridge_fallback = false;  // normal equations were singular
};

// Linear structural equations fitted over a user-supplied causal graph.
// Endogenous nodes (those with parents) carry one equation each; every other
// feature is treated as exogenous.
struct StructuralModel {
  CausalGraph graph;
  std::vector<StructuralEquation> equations;
  std::vector<std::string> warnings;

  bool is_endogenous(const std::string& feature) const;
  const StructuralEquation& equation_for(const std::string& feature) const;
};

// Fits one OLS equation per endogenous node on the given (normalized) data.
// Singular systems fall back to a tiny ridge penalty and record a warning.
// `force_categorical_exogenous` drops equations whose child is categorical,
// so those features keep the plain feature-space distance.
StructuralModel fit_structural_model(const Dataset& data,
                                     const CausalGraph& graph,
                                     bool force_categorical_exogenous = false);

// Fitted value of an endogenous node from the instance's parent values.
double predict_node(const StructuralModel& model, const std::string& node,
                    const FeatureSchema& schema, const Instance& x);

// Squared gap between the value node v "should" take given the
// counterfactual's parents and the original's observed value of v.
double causal_distance(const StructuralModel& model, const std::string& node,
                       const FeatureSchema& schema, const Instance& x_cf,
                       const Instance& x_org);

// Per-feature squared feature-space distance: (a-b)^2 for continuous values,
// squared embedding-row distance for categorical ones.
double feature_distance(const Autoencoder& ae, const FeatureSchema& schema,
                        std::size_t feature_index, const Instance& x_cf,
                        const Instance& x_org);

// Plain mixed-space distance over ALL features (no causal terms).
double instance_distance(const Autoencoder& ae, const FeatureSchema& schema,
                         const Instance& x_cf, const Instance& x_org);

// Combined proximity: plain distance over exogenous features plus causal
// distance over endogenous ones.
double final_distance(const StructuralModel& model, const Autoencoder& ae,
                      const FeatureSchema& schema, const Instance& x_cf,
                      const Instance& x_org);

}  // namespace proce
