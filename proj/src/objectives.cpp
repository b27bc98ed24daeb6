#include "proce/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "proce/error.hpp"

namespace proce {

namespace {

double squared_distance(const std::vector<double>& a,
                        const std::vector<double>& b) {
  if (a.size() != b.size()) throw ShapeError("latent length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

}  // namespace

std::vector<std::size_t> knn_counterfactual_class(
    const Dataset& data, const Autoencoder& ae, const Instance& x_org,
    int y_org, std::size_t k,
    const std::vector<std::vector<double>>* latents) {
  if (k == 0) throw UsageError("neighbor count must be positive");
  if (latents != nullptr && latents->size() != data.size()) {
    throw UsageError("latent cache size does not match dataset");
  }
  const std::vector<double> origin = encode(ae, data.schema, x_org);
  std::vector<std::pair<double, std::size_t>> scored;  // (distance, row)
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (data.labels[r] == y_org) continue;
    const double d =
        latents != nullptr
            ? squared_distance((*latents)[r], origin)
            : squared_distance(encode(ae, data.schema, data.rows[r]), origin);
    scored.emplace_back(d, r);
  }
  if (scored.size() < k) {
    throw DataError("need " + std::to_string(k) + " rows of class != " +
                    std::to_string(y_org) + " but only " +
                    std::to_string(scored.size()) + " exist");
  }
  // Ties resolve to the lowest row index.
  std::sort(scored.begin(), scored.end());
  std::vector<std::size_t> picked(k);
  for (std::size_t i = 0; i < k; ++i) picked[i] = scored[i].second;
  return picked;
}

std::vector<double> compute_prototype(
    const Dataset& data, const Autoencoder& ae,
    const std::vector<std::size_t>& neighbor_indices,
    const std::vector<std::vector<double>>* latents) {
  if (neighbor_indices.empty()) {
    throw UsageError("prototype needs at least one neighbor");
  }
  std::vector<double> proto;
  for (std::size_t idx : neighbor_indices) {
    if (idx >= data.size()) throw UsageError("neighbor index out of range");
    const std::vector<double> code =
        latents != nullptr ? (*latents)[idx]
                           : encode(ae, data.schema, data.rows[idx]);
    if (proto.empty()) {
      proto.assign(code.size(), 0.0);
    }
    for (std::size_t i = 0; i < code.size(); ++i) proto[i] += code[i];
  }
  const double inv = 1.0 / static_cast<double>(neighbor_indices.size());
  for (double& v : proto) v *= inv;
  return proto;
}

PrototypeContext build_prototype_context(
    const Dataset& data, const Autoencoder& ae, const Instance& x_org,
    int y_org, int y_cf, std::size_t k,
    const std::vector<std::vector<double>>* latents) {
  if (y_org == y_cf) throw UsageError("target class must differ from origin");
  PrototypeContext ctx;
  ctx.k = k;
  ctx.y_org = y_org;
  ctx.y_cf = y_cf;
  ctx.neighbor_indices =
      knn_counterfactual_class(data, ae, x_org, y_org, k, latents);
  ctx.proto = compute_prototype(data, ae, ctx.neighbor_indices, latents);
  return ctx;
}

double f_pred(const Classifier& clf, const Instance& x_cf, int y_cf) {
  return cross_entropy(clf.predict_proba(x_cf), y_cf);
}

double f_proto(const Autoencoder& ae, const FeatureSchema& schema,
               const Instance& x_cf, const std::vector<double>& proto) {
  return squared_distance(encode(ae, schema, x_cf), proto);
}

double f_dist(const Autoencoder& ae, const FeatureSchema& schema,
              const Instance& x_cf, const Instance& x_org) {
  return instance_distance(ae, schema, x_cf, x_org);
}

void EvalContext::validate() const {
  if (classifier == nullptr || ae == nullptr || scm == nullptr ||
      schema == nullptr || proto == nullptr || x_org == nullptr) {
    throw UsageError("evaluation context is missing a component");
  }
  if (y_cf != 0 && y_cf != 1) {
    throw UsageError("target class must be 0 or 1");
  }
}

ObjectiveVector evaluate_objectives(const EvalContext& ctx,
                                    const Instance& candidate) {
  ctx.validate();
  ObjectiveVector out;
  out.pred = f_pred(*ctx.classifier, candidate, ctx.y_cf);
  out.proto = f_proto(*ctx.ae, *ctx.schema, candidate, *ctx.proto);
  out.dist_final =
      final_distance(*ctx.scm, *ctx.ae, *ctx.schema, candidate, *ctx.x_org);
  for (double v : {out.pred, out.proto, out.dist_final}) {
    if (!std::isfinite(v)) {
      throw DomainError("objective evaluation produced a non-finite value");
    }
  }
  return out;
}

}  // namespace proce
