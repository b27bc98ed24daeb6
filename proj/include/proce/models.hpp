#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "proce/data.hpp"
#include "proce/nn.hpp"

namespace proce {

enum class ClassifierPreset { kNet3, kNet5 };

const char* classifier_preset_name(ClassifierPreset p);
ClassifierPreset classifier_preset_from_name(const std::string& name);

// Binary probabilistic classifier H: feature vector -> P(class 1).
// Inputs are normalized continuous values and raw category indices.
struct Classifier {
  MlpNetwork net;
  ClassifierPreset preset = ClassifierPreset::kNet3;
  std::string schema_fingerprint;

  double predict_proba(const Instance& x) const;
  int predict_class(const Instance& x) const {
    return predict_proba(x) >= 0.5 ? 1 : 0;
  }
};

// Untrained classifier with the preset topology:
//   net3: input -> 64 -> 32 -> 16 -> 1
//   net5: input -> 256 -> 128 -> 64 -> 32 -> 16 -> 1
// ReLU + dropout 0.1 on hidden layers, sigmoid head.
Classifier build_classifier(ClassifierPreset preset, std::size_t input_dim,
                            std::uint64_t seed);

struct ClassifierTrainResult {
  Classifier classifier;
  TrainResult history;
};

ClassifierTrainResult train_classifier(const Dataset& train,
                                       ClassifierPreset preset,
                                       const TrainConfig& cfg);

double accuracy(const Classifier& clf, const Dataset& data);

// Autoencoder over the embedded feature space: continuous features enter as
// single slots, each categorical feature as a learned embedding row. The
// encoder maps the embedded vector to an E-dimensional latent code.
struct Autoencoder {
  MlpNetwork encoder;
  MlpNetwork decoder;
  std::size_t embedding_dim = 0;      // latent width E
  std::size_t cat_embedding_dim = 0;  // per-categorical-feature width
  // One matrix per schema feature: n_categories x cat_embedding_dim for
  // categorical features, empty for continuous ones.
  std::vector<Matrix> cat_embeddings;
  std::string schema_fingerprint;

  std::size_t embedded_input_dim() const { return encoder.input_dim(); }
};

// Width of the embedded representation for a schema.
std::size_t embedded_dim(const FeatureSchema& schema,
                         std::size_t cat_embedding_dim);

// Embedded representation x-tilde of an instance.
std::vector<double> embed_instance(const Autoencoder& ae,
                                   const FeatureSchema& schema,
                                   const Instance& x);

// Latent code Q(x) = encoder(x-tilde).
std::vector<double> encode(const Autoencoder& ae, const FeatureSchema& schema,
                           const Instance& x);

std::vector<std::vector<double>> encode_all(const Autoencoder& ae,
                                            const FeatureSchema& schema,
                                            const std::vector<Instance>& rows);

// Decoder(encoder(x-tilde)), in embedded space.
std::vector<double> reconstruct(const Autoencoder& ae,
                                const FeatureSchema& schema, const Instance& x);

// Squared reconstruction distance ||x-tilde - decoder(encoder(x-tilde))||^2.
double reconstruction_error(const Autoencoder& ae, const FeatureSchema& schema,
                            const Instance& x);

// Squared distance between two embedding rows of one categorical feature.
double cat_embedding_distance(const Autoencoder& ae,
                              const FeatureSchema& schema,
                              std::size_t feature_index, std::size_t cat_a,
                              std::size_t cat_b);

struct AutoencoderConfig {
  std::size_t embedding_dim = 256;
  std::size_t cat_embedding_dim = 8;
  std::size_t hidden_dim = 128;
  TrainConfig train;

  void validate() const;
};

struct AutoencoderTrainResult {
  Autoencoder ae;
  TrainResult history;
};

// Trains encoder/decoder jointly on reconstruction of the embedded inputs;
// categorical embedding rows are updated from the input gradient, with the
// reconstruction target held constant each step.
AutoencoderTrainResult train_autoencoder(const Dataset& data,
                                         const AutoencoderConfig& cfg);

// Class-conditional autoencoders used by the interpretability metrics, plus
// one trained on the full data.
struct AutoencoderTriple {
  Autoencoder class0;
  Autoencoder class1;
  Autoencoder full;

  const Autoencoder& for_class(int y) const;
};

AutoencoderTriple train_class_autoencoders(const Dataset& data,
                                           const AutoencoderConfig& cfg);

}  // namespace proce
