#include "proce/causal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "proce/error.hpp"

namespace proce {

namespace {

constexpr double kPivotTolerance = 1e-12;
constexpr double kRidgeLambda = 1e-8;

// Solves A x = b in place by Gauss-Jordan elimination with partial pivoting.
// Returns false when a pivot collapses (singular system).
bool solve_linear(std::vector<std::vector<double>>& a, std::vector<double>& b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < kPivotTolerance) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a[r][col] / a[col][col];
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return true;
}

}  // namespace

std::vector<std::string> CausalGraph::parents_of(const std::string& node) const {
  std::vector<std::string> parents;
  for (const auto& [from, to] : edges) {
    if (to == node) parents.push_back(from);
  }
  return parents;
}

std::vector<std::string> validate_dag(const CausalGraph& graph) {
  if (graph.nodes.empty()) throw DataError("causal graph has no nodes");
  std::set<std::string> node_set;
  for (const std::string& n : graph.nodes) {
    if (!node_set.insert(n).second) {
      throw DataError("duplicate node '" + n + "' in causal graph");
    }
  }
  std::map<std::string, std::vector<std::string>> children;
  std::map<std::string, std::size_t> in_degree;
  for (const std::string& n : graph.nodes) in_degree[n] = 0;
  std::set<std::pair<std::string, std::string>> seen_edges;
  for (const auto& [from, to] : graph.edges) {
    for (const std::string* end : {&from, &to}) {
      if (node_set.count(*end) == 0) {
        throw DataError("edge endpoint '" + *end +
                        "' is not a node of the causal graph");
      }
    }
    if (from == to) throw DataError("self-loop on node '" + from + "'");
    if (!seen_edges.insert({from, to}).second) {
      throw DataError("duplicate edge " + from + " -> " + to);
    }
    children[from].push_back(to);
    in_degree[to] += 1;
  }
  // Kahn's algorithm; whatever remains when the queue drains is cyclic.
  std::vector<std::string> order;
  std::vector<std::string> ready;
  for (const std::string& n : graph.nodes) {
    if (in_degree[n] == 0) ready.push_back(n);
  }
  while (!ready.empty()) {
    // Pop the lexicographically smallest for a deterministic order.
    const auto it = std::min_element(ready.begin(), ready.end());
    const std::string node = *it;
    ready.erase(it);
    order.push_back(node);
    for (const std::string& child : children[node]) {
      if (--in_degree[child] == 0) ready.push_back(child);
    }
  }
  if (order.size() != graph.nodes.size()) {
    std::string cycle;
    for (const std::string& n : graph.nodes) {
      if (std::find(order.begin(), order.end(), n) == order.end()) {
        if (!cycle.empty()) cycle += ", ";
        cycle += n;
      }
    }
    throw DataError("causal graph contains a cycle involving: " + cycle);
  }
  return order;
}

bool StructuralModel::is_endogenous(const std::string& feature) const {
  for (const StructuralEquation& eq : equations) {
    if (eq.child == feature) return true;
  }
  return false;
}

const StructuralEquation& StructuralModel::equation_for(
    const std::string& feature) const {
  for (const StructuralEquation& eq : equations) {
    if (eq.child == feature) return eq;
  }
  throw UsageError("no structural equation for feature '" + feature + "'");
}

StructuralModel fit_structural_model(const Dataset& data,
                                     const CausalGraph& graph,
                                     bool force_categorical_exogenous) {
  data.validate();
  const std::vector<std::string> order = validate_dag(graph);
  for (const std::string& node : graph.nodes) {
    if (!data.schema.has_feature(node)) {
      throw SchemaError("causal graph node '" + node +
                        "' is not a feature of the dataset");
    }
  }
  if (data.rows.empty()) throw UsageError("cannot fit equations on no rows");

  StructuralModel model;
  model.graph = graph;
  for (const std::string& node : order) {
    std::vector<std::string> parents = graph.parents_of(node);
    if (parents.empty()) continue;  // exogenous
    const Feature& child = data.schema.features[data.schema.index_of(node)];
    if (child.kind == FeatureKind::kCategorical &&
        force_categorical_exogenous) {
      model.warnings.push_back("treating categorical node '" + node +
                               "' as exogenous as requested");
      continue;
    }
    std::sort(parents.begin(), parents.end());  // stable coefficient order
    const std::size_t k = parents.size();
    const std::size_t n = data.rows.size();
    if (n < k + 1) {
      throw DataError("not enough rows (" + std::to_string(n) +
                      ") to fit an equation with " + std::to_string(k) +
                      " parents for node '" + node + "'");
    }
    std::vector<std::size_t> parent_idx(k);
    for (std::size_t i = 0; i < k; ++i) {
      parent_idx[i] = data.schema.index_of(parents[i]);
    }
    const std::size_t child_idx = data.schema.index_of(node);

    // Normal equations (X^T X) beta = X^T y with an intercept column.
    const std::size_t dim = k + 1;
    std::vector<std::vector<double>> xtx(dim, std::vector<double>(dim, 0.0));
    std::vector<double> xty(dim, 0.0);
    for (const Instance& row : data.rows) {
      std::vector<double> feats(dim, 1.0);
      for (std::size_t i = 0; i < k; ++i) feats[i + 1] = row[parent_idx[i]];
      const double y = row[child_idx];
      for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = 0; b < dim; ++b) xtx[a][b] += feats[a] * feats[b];
        xty[a] += feats[a] * y;
      }
    }
    std::vector<std::vector<double>> a_copy = xtx;
    std::vector<double> beta = xty;
    bool ridge = false;
    if (!solve_linear(a_copy, beta)) {
      // Collinear parents: retry with a small ridge penalty on the diagonal.
      ridge = true;
      a_copy = xtx;
      for (std::size_t i = 0; i < dim; ++i) a_copy[i][i] += kRidgeLambda;
      beta = xty;
      if (!solve_linear(a_copy, beta)) {
        throw DataError("cannot fit structural equation for node '" + node +
                        "': design matrix is singular even with a ridge");
      }
      model.warnings.push_back("equation for '" + node +
                               "' used a ridge fallback (collinear parents)");
    }

    StructuralEquation eq;
    eq.child = node;
    eq.parents = parents;
    eq.intercept = beta[0];
    eq.coefficients.assign(beta.begin() + 1, beta.end());
    eq.ridge_fallback = ridge;

    double y_mean = 0.0;
    for (const Instance& row : data.rows) y_mean += row[child_idx];
    y_mean /= static_cast<double>(n);
    double ss_res = 0.0, ss_tot = 0.0;
    for (const Instance& row : data.rows) {
      double fitted = eq.intercept;
      for (std::size_t i = 0; i < k; ++i) {
        fitted += eq.coefficients[i] * row[parent_idx[i]];
      }
      const double y = row[child_idx];
      ss_res += (y - fitted) * (y - fitted);
      ss_tot += (y - y_mean) * (y - y_mean);
    }
    eq.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot
                                : (ss_res <= kPivotTolerance ? 1.0 : 0.0);
    model.equations.push_back(std::move(eq));
  }
  return model;
}

double predict_node(const StructuralModel& model, const std::string& node,
                    const FeatureSchema& schema, const Instance& x) {
  const StructuralEquation& eq = model.equation_for(node);
  double value = eq.intercept;
  for (std::size_t i = 0; i < eq.parents.size(); ++i) {
    value += eq.coefficients[i] * x[schema.index_of(eq.parents[i])];
  }
  return value;
}

double causal_distance(const StructuralModel& model, const std::string& node,
                       const FeatureSchema& schema, const Instance& x_cf,
                       const Instance& x_org) {
  const double predicted = predict_node(model, node, schema, x_cf);
  const double observed = x_org[schema.index_of(node)];
  const double d = predicted - observed;
  return d * d;
}

double feature_distance(const Autoencoder& ae, const FeatureSchema& schema,
                        std::size_t feature_index, const Instance& x_cf,
                        const Instance& x_org) {
  const Feature& f = schema.at(feature_index);
  if (f.kind == FeatureKind::kContinuous) {
    const double d = x_cf[feature_index] - x_org[feature_index];
    return d * d;
  }
  return cat_embedding_distance(ae, schema, feature_index,
                                static_cast<std::size_t>(x_cf[feature_index]),
                                static_cast<std::size_t>(x_org[feature_index]));
}

double instance_distance(const Autoencoder& ae, const FeatureSchema& schema,
                         const Instance& x_cf, const Instance& x_org) {
  double total = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    total += feature_distance(ae, schema, i, x_cf, x_org);
  }
  return total;
}

double final_distance(const StructuralModel& model, const Autoencoder& ae,
                      const FeatureSchema& schema, const Instance& x_cf,
                      const Instance& x_org) {
  double total = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const std::string& name = schema.at(i).name;
    if (model.is_endogenous(name)) {
      total += causal_distance(model, name, schema, x_cf, x_org);
    } else {
      total += feature_distance(ae, schema, i, x_cf, x_org);
    }
  }
  return total;
}

}  // namespace proce
