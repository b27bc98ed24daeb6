#include "proce/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "proce/error.hpp"
#include "proce/util.hpp"

namespace proce {

namespace {

constexpr std::size_t kEarlyStopPatience = 10;

void evaluate_population(Population& pop, const EvalContext& ctx,
                         const FeatureSchema& schema, const Instance& x_org) {
  for (Candidate& c : pop.members) {
    if (c.objectives.has_value()) continue;
    c.objectives = evaluate_objectives(ctx, decode(c, schema, x_org));
  }
}

}  // namespace

void ExplainRequest::validate() const {
  ga.validate();
  if (y_org != 0 && y_org != 1) throw UsageError("origin class must be 0 or 1");
  if (y_cf != 0 && y_cf != 1) throw UsageError("target class must be 0 or 1");
  if (y_org == y_cf) {
    throw UsageError("target class must differ from the origin class");
  }
  if (k_neighbors == 0) throw ConfigError("neighbor count must be positive");
}

void ModelBundle::validate() const {
  schema.validate();
  train.validate();
  if (!train.normalized) {
    throw UsageError("bundle training data must be normalized");
  }
  const std::string fp = schema.fingerprint();
  if (train.schema.fingerprint() != fp) {
    throw SchemaError("bundle training data schema differs from bundle schema");
  }
  if (!classifier.schema_fingerprint.empty() &&
      classifier.schema_fingerprint != fp) {
    throw SchemaError("classifier was trained against a different schema");
  }
  if (!autoencoder.schema_fingerprint.empty() &&
      autoencoder.schema_fingerprint != fp) {
    throw SchemaError("autoencoder was trained against a different schema");
  }
  if (!latents.empty() && latents.size() != train.size()) {
    throw UsageError("latent cache size does not match training data");
  }
}

void ModelBundle::build_latent_cache() {
  latents = encode_all(autoencoder, schema, train.rows);
}

Population init_population(const Instance& x_org, const FeatureSchema& schema,
                           const GaConfig& ga, Rng& rng) {
  ga.validate();
  validate_instance(schema, x_org);
  Population pop;
  pop.members.resize(ga.population_size);
  // Member 0 is the original itself, so a do-nothing candidate always exists.
  pop.members[0].genes = x_org.values;
  for (std::size_t m = 1; m < ga.population_size; ++m) {
    std::vector<double>& genes = pop.members[m].genes;
    genes.resize(schema.size());
    for (std::size_t g = 0; g < schema.size(); ++g) {
      const Feature& f = schema.at(g);
      if (!f.is_mutable) {
        genes[g] = x_org[g];
      } else if (f.kind == FeatureKind::kContinuous) {
        genes[g] =
            std::clamp(rng.normal(x_org[g], ga.init_sigma), 0.0, 1.0);
      } else if (rng.bernoulli(ga.init_cat_keep_prob)) {
        genes[g] = x_org[g];
      } else {
        const auto n_cats = f.categories.size();
        const auto cur = static_cast<std::size_t>(x_org[g]);
        std::size_t pick = rng.uniform_index(n_cats - 1);
        if (pick >= cur) ++pick;
        genes[g] = static_cast<double>(pick);
      }
    }
  }
  return pop;
}

Instance decode(const Candidate& c, const FeatureSchema& schema,
                const Instance& x_org) {
  if (c.genes.size() != schema.size()) {
    throw ShapeError("candidate gene layout does not match schema");
  }
  Instance out;
  out.values.resize(schema.size());
  for (std::size_t g = 0; g < schema.size(); ++g) {
    const Feature& f = schema.at(g);
    double v = c.genes[g];
    if (f.kind == FeatureKind::kContinuous) v = std::clamp(v, 0.0, 1.0);
    if (!f.is_mutable) v = x_org[g];
    out.values[g] = v;
  }
  validate_instance(schema, out);
  return out;
}

FinalSelection select_final(const Population& pop, const FrontPartition& fronts,
                            const Classifier& clf, const FeatureSchema& schema,
                            const Instance& x_org, int y_cf) {
  if (fronts.fronts.empty() || fronts.fronts.front().empty()) {
    throw UsageError("final selection needs a non-empty first front");
  }
  const std::vector<std::size_t>& first = fronts.fronts.front();
  FinalSelection best;
  bool found = false;
  for (std::size_t idx : first) {
    const Candidate& c = pop.members[idx];
    if (!c.objectives.has_value()) {
      throw UsageError("final selection over unevaluated candidates");
    }
    if (clf.predict_class(decode(c, schema, x_org)) != y_cf) continue;
    if (!found) {
      best = {idx, true};
      found = true;
      continue;
    }
    const ObjectiveVector& cand = *c.objectives;
    const ObjectiveVector& cur = *pop.members[best.index].objectives;
    if (cand.dist_final != cur.dist_final) {
      if (cand.dist_final < cur.dist_final) best.index = idx;
    } else if (cand.pred != cur.pred) {
      if (cand.pred < cur.pred) best.index = idx;
    }  // equal on both: keep the lower index (fronts are index-ordered)
  }
  if (!found) return {first.front(), false};
  return best;
}

ExplanationReport run_proce(const ExplainRequest& request,
                            const ModelBundle& bundle) {
  const auto t0 = std::chrono::steady_clock::now();
  request.validate();
  bundle.validate();
  validate_instance(bundle.schema, request.x_org);

  const PrototypeContext proto = build_prototype_context(
      bundle.train, bundle.autoencoder, request.x_org, request.y_org,
      request.y_cf, request.k_neighbors,
      bundle.latents.empty() ? nullptr : &bundle.latents);

  EvalContext ctx;
  ctx.classifier = &bundle.classifier;
  ctx.ae = &bundle.autoencoder;
  ctx.scm = &bundle.scm;
  ctx.schema = &bundle.schema;
  ctx.proto = &proto.proto;
  ctx.x_org = &request.x_org;
  ctx.y_cf = request.y_cf;

  const GaConfig& ga = request.ga;
  Rng rng(ga.seed);
  Population p = init_population(request.x_org, bundle.schema, ga, rng);
  Population q;
  std::size_t generations_run = 0;
  std::vector<double> last_selected;
  std::size_t stable_count = 0;

  for (std::size_t gen = 1; gen <= ga.generations; ++gen) {
    Population merged = p;
    merged.members.insert(merged.members.end(), q.members.begin(),
                          q.members.end());
    evaluate_population(merged, ctx, bundle.schema, request.x_org);
    p = environmental_selection(merged, ga.population_size,
                                ga.standard_crowding);
    generations_run = gen;

    if (ga.early_stop) {
      const FrontPartition fronts = non_dominated_sort(p);
      const FinalSelection sel =
          select_final(p, fronts, bundle.classifier, bundle.schema,
                       request.x_org, request.y_cf);
      const std::vector<double>& genes = p.members[sel.index].genes;
      if (sel.valid && genes == last_selected) {
        if (++stable_count >= kEarlyStopPatience) break;
      } else {
        stable_count = 0;
      }
      last_selected = genes;
    }

    // Variation: random disjoint pairing of the survivors, uniform gene
    // swaps per pair, then per-gene mutation.
    std::vector<std::size_t> order(ga.population_size);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i-- > 1;) {
      std::swap(order[i], order[rng.uniform_index(i + 1)]);
    }
    q.members.clear();
    for (std::size_t i = 0; i + 1 < order.size(); i += 2) {
      Candidate a = p.members[order[i]];
      Candidate b = p.members[order[i + 1]];
      a.rank.reset();
      a.crowding.reset();
      b.rank.reset();
      b.crowding.reset();
      crossover(a, b, bundle.schema, ga.crossover_prob, rng);
      mutate(a, bundle.schema, ga, rng);
      mutate(b, bundle.schema, ga, rng);
      q.members.push_back(std::move(a));
      q.members.push_back(std::move(b));
    }
  }

  // With G=0 the initial population itself is scored and reported.
  evaluate_population(p, ctx, bundle.schema, request.x_org);
  const FrontPartition fronts = non_dominated_sort(p);
  const FinalSelection sel = select_final(
      p, fronts, bundle.classifier, bundle.schema, request.x_org, request.y_cf);
  const Candidate& chosen = p.members[sel.index];
  const Instance x_cf = decode(chosen, bundle.schema, request.x_org);

  ExplanationReport report;
  report.x_org_norm = request.x_org;
  report.x_cf_norm = x_cf;
  if (bundle.train.normalizer.has_value()) {
    report.x_org_raw =
        bundle.train.normalizer->denormalize(bundle.schema, request.x_org);
    report.x_cf_raw = bundle.train.normalizer->denormalize(bundle.schema, x_cf);
  } else {
    report.x_org_raw = request.x_org;
    report.x_cf_raw = x_cf;
  }
  report.y_org = request.y_org;
  report.y_cf = request.y_cf;
  report.objectives = *chosen.objectives;
  report.valid = sel.valid;
  report.generations_run = generations_run;
  report.seed = ga.seed;
  for (std::size_t g = 0; g < bundle.schema.size(); ++g) {
    const Feature& f = bundle.schema.at(g);
    FeatureDelta delta;
    delta.feature = f.name;
    delta.is_categorical = f.kind == FeatureKind::kCategorical;
    if (delta.is_categorical) {
      delta.from_label = f.categories[static_cast<std::size_t>(report.x_org_raw[g])];
      delta.to_label = f.categories[static_cast<std::size_t>(report.x_cf_raw[g])];
    } else {
      delta.from_value = report.x_org_raw[g];
      delta.to_value = report.x_cf_raw[g];
    }
    delta.changed = request.x_org[g] != x_cf[g];
    report.deltas.push_back(std::move(delta));
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace proce
