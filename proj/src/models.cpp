#include "proce/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "proce/error.hpp"

namespace proce {

namespace {

std::vector<std::size_t> preset_hidden(ClassifierPreset p) {
  switch (p) {
    case ClassifierPreset::kNet3:
      return {64, 32, 16};
    case ClassifierPreset::kNet5:
      return {256, 128, 64, 32, 16};
  }
  throw UsageError("unknown classifier preset");
}

constexpr double kClassifierDropout = 0.1;

}  // namespace

const char* classifier_preset_name(ClassifierPreset p) {
  switch (p) {
    case ClassifierPreset::kNet3:
      return "net3";
    case ClassifierPreset::kNet5:
      return "net5";
  }
  throw UsageError("unknown classifier preset");
}

ClassifierPreset classifier_preset_from_name(const std::string& name) {
  if (name == "net3") return ClassifierPreset::kNet3;
  if (name == "net5") return ClassifierPreset::kNet5;
  throw ConfigError("unknown classifier preset: " + name +
                    " (expected net3 or net5)");
}

double Classifier::predict_proba(const Instance& x) const {
  const std::vector<double> out = forward(net, x.values);
  return out[0];
}

Classifier build_classifier(ClassifierPreset preset, std::size_t input_dim,
                            std::uint64_t seed) {
  if (input_dim == 0) throw ShapeError("classifier input dim must be positive");
  Rng rng(seed);
  Classifier clf;
  clf.preset = preset;
  clf.net = make_mlp(input_dim, preset_hidden(preset), 1, Activation::kRelu,
                     Activation::kSigmoid, kClassifierDropout, rng);
  return clf;
}

ClassifierTrainResult train_classifier(const Dataset& train,
                                       ClassifierPreset preset,
                                       const TrainConfig& cfg) {
  train.validate();
  if (!train.normalized) {
    throw UsageError("classifier training expects normalized data");
  }
  ClassifierTrainResult result;
  result.classifier =
      build_classifier(preset, train.schema.size(), Rng::derive(cfg.seed, 1));
  result.classifier.schema_fingerprint = train.schema.fingerprint();
  Matrix inputs(train.size(), train.schema.size());
  Matrix targets(train.size(), 1);
  for (std::size_t r = 0; r < train.size(); ++r) {
    std::copy(train.rows[r].values.begin(), train.rows[r].values.end(),
              inputs.row(r));
    targets.at(r, 0) = static_cast<double>(train.labels[r]);
  }
  result.history = proce::train(result.classifier.net, inputs, targets,
                                LossKind::kBinaryCrossEntropy, cfg);
  return result;
}

double accuracy(const Classifier& clf, const Dataset& data) {
  if (data.rows.empty()) throw UsageError("accuracy over no rows");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    hits += clf.predict_class(data.rows[r]) == data.labels[r] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

std::size_t embedded_dim(const FeatureSchema& schema,
                         std::size_t cat_embedding_dim) {
  std::size_t dim = 0;
  for (const Feature& f : schema.features) {
    dim += f.kind == FeatureKind::kContinuous ? 1 : cat_embedding_dim;
  }
  return dim;
}

std::vector<double> embed_instance(const Autoencoder& ae,
                                   const FeatureSchema& schema,
                                   const Instance& x) {
  validate_instance(schema, x);
  if (ae.cat_embeddings.size() != schema.size()) {
    throw SchemaError("autoencoder embeddings do not match schema");
  }
  std::vector<double> out;
  out.reserve(ae.embedded_input_dim());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema.at(i).kind == FeatureKind::kContinuous) {
      out.push_back(x[i]);
    } else {
      const Matrix& emb = ae.cat_embeddings[i];
      const auto cat = static_cast<std::size_t>(x[i]);
      const double* row = emb.row(cat);
      out.insert(out.end(), row, row + emb.cols);
    }
  }
  if (out.size() != ae.embedded_input_dim()) {
    throw ShapeError("embedded width does not match encoder input");
  }
  return out;
}

std::vector<double> encode(const Autoencoder& ae, const FeatureSchema& schema,
                           const Instance& x) {
  return forward(ae.encoder, embed_instance(ae, schema, x));
}

std::vector<std::vector<double>> encode_all(const Autoencoder& ae,
                                            const FeatureSchema& schema,
                                            const std::vector<Instance>& rows) {
  std::vector<std::vector<double>> latents;
  latents.reserve(rows.size());
  for (const Instance& row : rows) latents.push_back(encode(ae, schema, row));
  return latents;
}

std::vector<double> reconstruct(const Autoencoder& ae,
                                const FeatureSchema& schema,
                                const Instance& x) {
  return forward(ae.decoder, encode(ae, schema, x));
}

double reconstruction_error(const Autoencoder& ae, const FeatureSchema& schema,
                            const Instance& x) {
  const std::vector<double> tilde = embed_instance(ae, schema, x);
  const std::vector<double> recon = forward(ae.decoder, forward(ae.encoder, tilde));
  double total = 0.0;
  for (std::size_t i = 0; i < tilde.size(); ++i) {
    const double d = tilde[i] - recon[i];
    total += d * d;
  }
  return total;
}

double cat_embedding_distance(const Autoencoder& ae,
                              const FeatureSchema& schema,
                              std::size_t feature_index, std::size_t cat_a,
                              std::size_t cat_b) {
  if (feature_index >= schema.size()) {
    throw UsageError("feature index out of range");
  }
  const Feature& f = schema.at(feature_index);
  if (f.kind != FeatureKind::kCategorical) {
    throw UsageError("feature '" + f.name + "' is not categorical");
  }
  const Matrix& emb = ae.cat_embeddings[feature_index];
  if (cat_a >= emb.rows || cat_b >= emb.rows) {
    throw UsageError("category index out of range for feature '" + f.name +
                     "'");
  }
  double total = 0.0;
  for (std::size_t c = 0; c < emb.cols; ++c) {
    const double d = emb.at(cat_a, c) - emb.at(cat_b, c);
    total += d * d;
  }
  return total;
}

void AutoencoderConfig::validate() const {
  if (embedding_dim == 0) throw ConfigError("latent width must be positive");
  if (cat_embedding_dim == 0) {
    throw ConfigError("categorical embedding width must be positive");
  }
  if (hidden_dim == 0) throw ConfigError("hidden width must be positive");
  train.validate();
}

AutoencoderTrainResult train_autoencoder(const Dataset& data,
                                         const AutoencoderConfig& cfg) {
  cfg.validate();
  data.validate();
  if (!data.normalized) {
    throw UsageError("autoencoder training expects normalized data");
  }
  if (data.rows.empty()) throw UsageError("autoencoder training needs rows");

  Rng init_rng(Rng::derive(cfg.train.seed, 2));
  Autoencoder ae;
  ae.embedding_dim = cfg.embedding_dim;
  ae.cat_embedding_dim = cfg.cat_embedding_dim;
  ae.schema_fingerprint = data.schema.fingerprint();
  ae.cat_embeddings.resize(data.schema.size());
  for (std::size_t i = 0; i < data.schema.size(); ++i) {
    const Feature& f = data.schema.at(i);
    if (f.kind != FeatureKind::kCategorical) continue;
    Matrix emb(f.categories.size(), cfg.cat_embedding_dim);
    const double limit = std::sqrt(
        6.0 / static_cast<double>(f.categories.size() + cfg.cat_embedding_dim));
    for (double& v : emb.data) v = init_rng.uniform(-limit, limit);
    ae.cat_embeddings[i] = std::move(emb);
  }
  const std::size_t in_dim = embedded_dim(data.schema, cfg.cat_embedding_dim);
  ae.encoder = make_mlp(in_dim, {cfg.hidden_dim}, cfg.embedding_dim,
                        Activation::kRelu, Activation::kIdentity, 0.0,
                        init_rng);
  ae.decoder = make_mlp(cfg.embedding_dim, {cfg.hidden_dim}, in_dim,
                        Activation::kRelu, Activation::kIdentity, 0.0,
                        init_rng);

  // Train encoder+decoder as one stacked network so a single backward pass
  // yields the input gradient used for the embedding-row updates.
  MlpNetwork stacked;
  stacked.layers = ae.encoder.layers;
  stacked.layers.insert(stacked.layers.end(), ae.decoder.layers.begin(),
                        ae.decoder.layers.end());

  Rng rng(cfg.train.seed);
  OptimizerState state = make_optimizer_state(stacked);
  std::vector<std::size_t> order(data.rows.size());
  std::iota(order.begin(), order.end(), 0);
  TrainResult history;

  // Per-feature embedding-row gradient accumulators for one batch.
  std::vector<Matrix> emb_grads(data.schema.size());

  for (std::size_t epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    for (std::size_t i = order.size(); i-- > 1;) {
      std::swap(order[i], order[rng.uniform_index(i + 1)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.train.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + cfg.train.batch_size);
      std::vector<LayerGrads> batch_grads;
      for (std::size_t i = 0; i < emb_grads.size(); ++i) {
        const Matrix& emb = ae.cat_embeddings[i];
        emb_grads[i] = emb.empty() ? Matrix{} : Matrix(emb.rows, emb.cols);
      }
      for (std::size_t bi = start; bi < stop; ++bi) {
        const Instance& row = data.rows[order[bi]];
        const std::vector<double> tilde = embed_instance(ae, data.schema, row);
        ForwardTrace trace = forward_trace(stacked, tilde, &rng);
        epoch_loss +=
            loss_value(trace.output(), tilde, LossKind::kMeanSquaredError);
        const std::vector<double> delta = output_delta(
            stacked, trace.output(), tilde, LossKind::kMeanSquaredError);
        Gradients grads = backward(stacked, trace, delta);
        // Scatter the input gradient back onto the embedding rows used by
        // this sample (the reconstruction target stays constant).
        std::size_t offset = 0;
        for (std::size_t fi = 0; fi < data.schema.size(); ++fi) {
          if (data.schema.at(fi).kind == FeatureKind::kContinuous) {
            ++offset;
            continue;
          }
          const auto cat = static_cast<std::size_t>(row[fi]);
          double* grow = emb_grads[fi].row(cat);
          for (std::size_t c = 0; c < cfg.cat_embedding_dim; ++c) {
            grow[c] += grads.d_input[offset + c];
          }
          offset += cfg.cat_embedding_dim;
        }
        accumulate(batch_grads, grads);
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      scale_gradients(batch_grads, inv);
      apply_gradients(stacked, batch_grads, state, cfg.train);
      for (std::size_t fi = 0; fi < data.schema.size(); ++fi) {
        if (emb_grads[fi].empty()) continue;
        for (std::size_t k = 0; k < emb_grads[fi].size(); ++k) {
          ae.cat_embeddings[fi].data[k] -=
              cfg.train.learning_rate * emb_grads[fi].data[k] * inv;
        }
      }
    }
    epoch_loss /= static_cast<double>(data.rows.size());
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("autoencoder loss became non-finite at epoch " +
                          std::to_string(epoch + 1));
    }
    history.loss_history.push_back(epoch_loss);
  }

  // Split the stacked weights back into encoder/decoder.
  const std::size_t n_enc = ae.encoder.layers.size();
  for (std::size_t i = 0; i < stacked.layers.size(); ++i) {
    if (i < n_enc) {
      ae.encoder.layers[i] = stacked.layers[i];
    } else {
      ae.decoder.layers[i - n_enc] = stacked.layers[i];
    }
  }
  return {std::move(ae), std::move(history)};
}

const Autoencoder& AutoencoderTriple::for_class(int y) const {
  if (y == 0) return class0;
  if (y == 1) return class1;
  throw UsageError("class must be 0 or 1");
}

AutoencoderTriple train_class_autoencoders(const Dataset& data,
                                           const AutoencoderConfig& cfg) {
  cfg.validate();
  data.validate();
  Dataset by_class[2];
  for (int c : {0, 1}) {
    by_class[c].schema = data.schema;
    by_class[c].normalized = data.normalized;
    by_class[c].normalizer = data.normalizer;
  }
  for (std::size_t r = 0; r < data.size(); ++r) {
    Dataset& part = by_class[data.labels[r]];
    part.rows.push_back(data.rows[r]);
    part.labels.push_back(data.labels[r]);
  }
  for (int c : {0, 1}) {
    if (by_class[c].rows.empty()) {
      throw DataError("no rows with label " + std::to_string(c) +
                      "; cannot train a class-conditional autoencoder");
    }
  }
  AutoencoderTriple triple;
  AutoencoderConfig sub = cfg;
  sub.train.seed = Rng::derive(cfg.train.seed, 3);
  triple.class0 = train_autoencoder(by_class[0], sub).ae;
  sub.train.seed = Rng::derive(cfg.train.seed, 4);
  triple.class1 = train_autoencoder(by_class[1], sub).ae;
  sub.train.seed = Rng::derive(cfg.train.seed, 5);
  triple.full = train_autoencoder(data, sub).ae;
  return triple;
}

}  // namespace proce
