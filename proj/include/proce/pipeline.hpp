#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "proce/data.hpp"
#include "proce/engine.hpp"
#include "proce/metrics.hpp"
#include "proce/models.hpp"
#include "proce/moo.hpp"
#include "proce/serialize.hpp"

namespace proce {

// File-level operations behind the command-line subcommands (and the python
// module). Each takes a resolved option struct plus the configuration echo
// embedded into every artifact it writes.

struct GenSimpleBnOptions {
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  SimpleBnParams params;
  std::string out_csv;  // schema/graph siblings derive from this path
};

struct GenSimpleBnResult {
  std::string csv_path;
  std::string schema_path;
  std::string graph_path;
  std::size_t n = 0;
  double positive_fraction = 0.0;
  std::vector<std::string> warnings;
};

GenSimpleBnResult run_gen_simple_bn(const GenSimpleBnOptions& opts,
                                    const Json& config_echo);

struct TrainOptions {
  std::string data_csv;
  std::string schema_path;
  std::string out_dir;
  std::string label_override;  // replaces the schema's label column name
  ClassifierPreset preset = ClassifierPreset::kNet3;
  std::size_t embedding_dim = 256;
  std::size_t cat_embedding_dim = 8;
  std::size_t ae_hidden_dim = 128;
  std::size_t classifier_epochs = 150;
  std::size_t ae_epochs = 60;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double train_ratio = 0.8;
  std::uint64_t seed = 0;
};

struct TrainSummary {
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double classifier_final_loss = 0.0;
  double autoencoder_final_loss = 0.0;
};

TrainSummary run_train(const TrainOptions& opts, const Json& config_echo);

struct FitScmOptions {
  std::string data_csv;
  std::string graph_path;
  std::string out_path;
  // Exactly one of these supplies the schema; a bundle also supplies the
  // normalizer so the equations line up with the search space.
  std::string schema_path;
  std::string bundle_dir;
  bool force_categorical_exogenous = false;
};

StructuralModel run_fit_scm(const FitScmOptions& opts, const Json& config_echo);

struct ExplainOptions {
  std::string bundle_dir;
  std::string scm_path;
  std::string out_dir;
  // Row indices into the bundle's test split; `count` N means rows 0..N-1.
  std::vector<std::size_t> indices;
  std::size_t count = 0;
  // One raw-valued instance instead of test rows: a file path or JSON text.
  std::string instance_json_path;
  std::string instance_json_text;
  int target_class = -1;           // 0, 1, or -1 = flip the prediction
  GaConfig ga;
  std::size_t k_neighbors = 25;
  std::size_t jobs = 1;
};

struct ExplainSummary {
  std::size_t total = 0;
  std::size_t valid = 0;
  double mean_runtime_seconds = 0.0;  // stdout-only; never written to disk
  std::vector<std::string> report_paths;
};

ExplainSummary run_explain(const ExplainOptions& opts, const Json& config_echo);

struct MetricComparison {
  std::string metric;
  TTestResult test;
};

struct EvaluateOptions {
  std::string reports_dir;
  std::string bundle_dir;
  std::string constraints_path;  // optional; no constraints = all satisfied
  std::string out_csv;
  std::string method_tag = "proce";
  std::string dataset_tag = "data";
  std::string compare_path;  // optional metrics JSON to test against
};

struct EvaluateSummary {
  MetricsReport metrics;
  std::string csv_path;
  std::string json_path;
  std::vector<MetricComparison> comparisons;
};

EvaluateSummary run_evaluate(const EvaluateOptions& opts,
                             const Json& config_echo);

// A trained bundle directory pulled back into memory.
struct LoadedBundle {
  FeatureSchema schema;
  Normalizer normalizer;
  Classifier classifier;
  AutoencoderTriple autoencoders;  // full doubles as the search encoder
  Dataset train_norm;
  Dataset test_norm;
  Dataset test_raw;
};

LoadedBundle load_bundle(const std::string& dir);

}  // namespace proce
