#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "proce/rng.hpp"

namespace proce {

enum class FeatureKind { kContinuous, kCategorical };

// Per-feature plausibility constraint checked by the evaluation metrics.
enum class ConstraintKind { kNone, kNondecreasing };

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  // Category labels in ordinal order; index into this vector is the encoded
  // value. Empty for continuous features.
  std::vector<std::string> categories;
  bool is_mutable = true;
  ConstraintKind constraint = ConstraintKind::kNone;

  std::size_t category_index(const std::string& label) const;
};

struct FeatureSchema {
  std::vector<Feature> features;
  std::string label_column = "label";

  std::size_t size() const { return features.size(); }
  const Feature& at(std::size_t i) const { return features[i]; }
  // Index of the named feature; throws SchemaError when absent.
  std::size_t index_of(const std::string& name) const;
  bool has_feature(const std::string& name) const;
  std::size_t continuous_count() const;
  std::size_t categorical_count() const;
  void validate() const;
  // Stable hash of the schema content, used to tie artifacts together.
  std::string fingerprint() const;
};

// One row of feature values: continuous features as reals, categorical
// features as the (exactly representable) category index.
struct Instance {
  std::vector<double> values;

  Instance() = default;
  explicit Instance(std::vector<double> v) : values(std::move(v)) {}
  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

// Checks value count, category index integrality/range, finiteness.
void validate_instance(const FeatureSchema& schema, const Instance& x);

struct ContinuousRange {
  double min = 0.0;
  double max = 0.0;
  bool degenerate = false;  // min == max in the fit data; maps to 0
};

// Min-max scaler over continuous features; categorical entries pass through
// untouched (they stay category indices in every representation).
struct Normalizer {
  // One entry per feature, aligned with the schema; unused for categoricals.
  std::vector<ContinuousRange> ranges;

  Instance normalize(const FeatureSchema& schema, const Instance& raw) const;
  Instance denormalize(const FeatureSchema& schema, const Instance& norm) const;
};

struct Dataset {
  FeatureSchema schema;
  std::vector<Instance> rows;
  std::vector<int> labels;  // binary, aligned with rows
  bool normalized = false;
  std::optional<Normalizer> normalizer;  // set once fitted/applied

  std::size_t size() const { return rows.size(); }
  void validate() const;
};

// Reads a headered CSV whose columns are the schema features plus the label
// column, in any order. Categorical cells hold category labels. Unknown
// categories, missing columns and unparseable cells raise errors naming the
// row and column.
Dataset load_csv(const std::string& path, const FeatureSchema& schema);

// Writes rows in schema order plus the label column, using shortest
// round-trip formatting so reading the file back reproduces exact values.
void write_csv(const Dataset& data, const std::string& path);

Normalizer fit_normalizer(const Dataset& data);

// Returns a copy with continuous values mapped through the normalizer and
// `normalized` set. Degenerate features map to 0.
Dataset apply_normalizer(const Dataset& data, const Normalizer& norm);

// Seeded shuffle split into (train, test); train gets floor(ratio * n) rows.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_ratio,
                                  std::uint64_t seed);

// Parameters of the synthetic two-cause benchmark generator:
//   a1 ~ N(mu1, sigma1^2),  a2 ~ N(mu2, sigma2^2)
//   a3 ~ N(k3 * (a1 + a2)^2 + b3, sigma3^2)
//   y  ~ Bernoulli(sigmoid(k_y * a1 * a2 + b_y - a3))
struct SimpleBnParams {
  double mu1 = 1.0;
  double sigma1 = 0.5;
  double mu2 = 1.0;
  double sigma2 = 0.5;
  double k3 = 0.3;
  double b3 = 0.0;
  double sigma3 = 0.1;
  double k_y = 1.0;
  double b_y = 0.3;

  void validate() const;
};

FeatureSchema simple_bn_schema();

// Draws n rows; appends a warning to *warnings when the minority class falls
// below 10% of samples.
Dataset generate_simple_bn(const SimpleBnParams& params, std::size_t n,
                           std::uint64_t seed,
                           std::vector<std::string>* warnings = nullptr);

}  // namespace proce
