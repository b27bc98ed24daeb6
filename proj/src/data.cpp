#include "proce/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "proce/error.hpp"
#include "proce/nn.hpp"
#include "proce/util.hpp"

namespace proce {

namespace {

constexpr double kMinorityWarnFraction = 0.10;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string describe_cell(std::size_t row, const std::string& column) {
  return "row " + std::to_string(row) + ", column '" + column + "'";
}

}  // namespace

std::size_t Feature::category_index(const std::string& label) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == label) return i;
  }
  throw DataError("unknown category '" + label + "' for feature '" + name +
                  "'");
}

std::size_t FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return i;
  }
  throw SchemaError("schema has no feature named '" + name + "'");
}

bool FeatureSchema::has_feature(const std::string& name) const {
  for (const Feature& f : features) {
    if (f.name == name) return true;
  }
  return false;
}

std::size_t FeatureSchema::continuous_count() const {
  return static_cast<std::size_t>(std::count_if(
      features.begin(), features.end(), [](const Feature& f) {
        return f.kind == FeatureKind::kContinuous;
      }));
}

std::size_t FeatureSchema::categorical_count() const {
  return features.size() - continuous_count();
}

void FeatureSchema::validate() const {
  if (features.empty()) throw SchemaError("schema must define features");
  std::set<std::string> names;
  for (const Feature& f : features) {
    if (f.name.empty()) throw SchemaError("feature names must be non-empty");
    if (!names.insert(f.name).second) {
      throw SchemaError("duplicate feature name '" + f.name + "'");
    }
    if (f.kind == FeatureKind::kCategorical) {
      if (f.categories.size() < 2) {
        throw SchemaError("categorical feature '" + f.name +
                          "' needs at least two categories");
      }
      std::set<std::string> cats(f.categories.begin(), f.categories.end());
      if (cats.size() != f.categories.size()) {
        throw SchemaError("feature '" + f.name +
                          "' has duplicate category labels");
      }
    } else if (!f.categories.empty()) {
      throw SchemaError("continuous feature '" + f.name +
                        "' must not list categories");
    }
  }
  if (label_column.empty()) throw SchemaError("label column must be named");
  if (names.count(label_column) > 0) {
    throw SchemaError("label column '" + label_column +
                      "' clashes with a feature name");
  }
}

std::string FeatureSchema::fingerprint() const {
  std::string canon;
  for (const Feature& f : features) {
    canon += f.name;
    canon += '|';
    canon += f.kind == FeatureKind::kContinuous ? 'c' : 'k';
    for (const std::string& c : f.categories) {
      canon += c;
      canon += ',';
    }
    canon += f.is_mutable ? "m" : "i";
    canon += f.constraint == ConstraintKind::kNondecreasing ? "n" : "-";
    canon += ';';
  }
  canon += label_column;
  // FNV-1a 64-bit.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char b : canon) {
    h ^= b;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

void validate_instance(const FeatureSchema& schema, const Instance& x) {
  if (x.size() != schema.size()) {
    throw ShapeError("instance has " + std::to_string(x.size()) +
                     " values but schema defines " +
                     std::to_string(schema.size()) + " features");
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const Feature& f = schema.at(i);
    const double v = x[i];
    if (!std::isfinite(v)) {
      throw DomainError("non-finite value for feature '" + f.name + "'");
    }
    if (f.kind == FeatureKind::kCategorical) {
      if (v != std::floor(v) || v < 0.0 ||
          v >= static_cast<double>(f.categories.size())) {
        throw DomainError("feature '" + f.name + "' holds " + format_double(v) +
                          ", not a valid category index");
      }
    }
  }
}

Instance Normalizer::normalize(const FeatureSchema& schema,
                               const Instance& raw) const {
  if (ranges.size() != schema.size()) {
    throw SchemaError("normalizer does not match schema");
  }
  Instance out = raw;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema.at(i).kind != FeatureKind::kContinuous) continue;
    const ContinuousRange& r = ranges[i];
    out[i] = r.degenerate ? 0.0 : (raw[i] - r.min) / (r.max - r.min);
  }
  return out;
}

Instance Normalizer::denormalize(const FeatureSchema& schema,
                                 const Instance& norm) const {
  if (ranges.size() != schema.size()) {
    throw SchemaError("normalizer does not match schema");
  }
  Instance out = norm;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema.at(i).kind != FeatureKind::kContinuous) continue;
    const ContinuousRange& r = ranges[i];
    out[i] = r.degenerate ? r.min : r.min + norm[i] * (r.max - r.min);
  }
  return out;
}

void Dataset::validate() const {
  schema.validate();
  if (labels.size() != rows.size()) {
    throw DataError("label count does not match row count");
  }
  for (const Instance& row : rows) validate_instance(schema, row);
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
  }
}

Dataset load_csv(const std::string& path, const FeatureSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty CSV file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);

  // Map each schema column to its position in the file.
  std::vector<std::size_t> feature_cols(schema.size());
  std::size_t label_col = 0;
  auto find_column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw SchemaError(path + ": missing column '" + name + "' (header has: " +
                      line + ")");
  };
  for (std::size_t i = 0; i < schema.size(); ++i) {
    feature_cols[i] = find_column(schema.at(i).name);
  }
  label_col = find_column(schema.label_column);

  Dataset data;
  data.schema = schema;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(path + ": row " + std::to_string(row_no) + " has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(header.size()));
    }
    Instance row;
    row.values.reserve(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const Feature& f = schema.at(i);
      const std::string cell = trim(cells[feature_cols[i]]);
      if (f.kind == FeatureKind::kContinuous) {
        const double v =
            parse_double(cell, path + ": " + describe_cell(row_no, f.name));
        if (!std::isfinite(v)) {
          throw DataError(path + ": non-finite value at " +
                          describe_cell(row_no, f.name));
        }
        row.values.push_back(v);
      } else {
        try {
          row.values.push_back(
              static_cast<double>(f.category_index(cell)));
        } catch (const DataError& e) {
          throw DataError(path + ": " + describe_cell(row_no, f.name) + ": " +
                          e.what());
        }
      }
    }
    const std::string label_cell = trim(cells[label_col]);
    const double y = parse_double(
        label_cell, path + ": " + describe_cell(row_no, schema.label_column));
    if (y != 0.0 && y != 1.0) {
      throw DataError(path + ": label must be 0 or 1 at " +
                      describe_cell(row_no, schema.label_column));
    }
    data.rows.push_back(std::move(row));
    data.labels.push_back(static_cast<int>(y));
  }
  if (in.bad()) throw IoError("read failure on CSV file: " + path);
  return data;
}

void write_csv(const Dataset& data, const std::string& path) {
  data.validate();
  std::string out;
  for (const Feature& f : data.schema.features) {
    out += f.name;
    out += ',';
  }
  out += data.schema.label_column;
  out += '\n';
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const Instance& row = data.rows[r];
    for (std::size_t i = 0; i < data.schema.size(); ++i) {
      const Feature& f = data.schema.at(i);
      if (f.kind == FeatureKind::kCategorical) {
        out += f.categories[static_cast<std::size_t>(row[i])];
      } else {
        out += format_double(row[i]);
      }
      out += ',';
    }
    out += std::to_string(data.labels[r]);
    out += '\n';
  }
  write_text_file(path, out);
}

Normalizer fit_normalizer(const Dataset& data) {
  if (data.rows.empty()) throw UsageError("cannot fit normalizer on no rows");
  if (data.normalized) {
    throw UsageError("refusing to fit a normalizer on normalized data");
  }
  Normalizer norm;
  norm.ranges.resize(data.schema.size());
  for (std::size_t i = 0; i < data.schema.size(); ++i) {
    if (data.schema.at(i).kind != FeatureKind::kContinuous) continue;
    double lo = data.rows[0][i];
    double hi = data.rows[0][i];
    for (const Instance& row : data.rows) {
      lo = std::min(lo, row[i]);
      hi = std::max(hi, row[i]);
    }
    norm.ranges[i] = ContinuousRange{lo, hi, lo == hi};
  }
  return norm;
}

Dataset apply_normalizer(const Dataset& data, const Normalizer& norm) {
  if (data.normalized) throw UsageError("data is already normalized");
  Dataset out = data;
  for (Instance& row : out.rows) row = norm.normalize(data.schema, row);
  out.normalized = true;
  out.normalizer = norm;
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_ratio,
                                  std::uint64_t seed) {
  if (!(train_ratio > 0.0) || !(train_ratio < 1.0)) {
    throw ConfigError("train ratio must lie strictly between 0 and 1");
  }
  if (data.rows.size() < 2) {
    throw UsageError("need at least two rows to split");
  }
  std::vector<std::size_t> order(data.rows.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size(); i-- > 1;) {
    std::swap(order[i], order[rng.uniform_index(i + 1)]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_ratio * static_cast<double>(order.size())));
  auto take = [&](std::size_t begin, std::size_t end) {
    Dataset part;
    part.schema = data.schema;
    part.normalized = data.normalized;
    part.normalizer = data.normalizer;
    for (std::size_t i = begin; i < end; ++i) {
      part.rows.push_back(data.rows[order[i]]);
      part.labels.push_back(data.labels[order[i]]);
    }
    return part;
  };
  return {take(0, n_train), take(n_train, order.size())};
}

void SimpleBnParams::validate() const {
  for (double s : {sigma1, sigma2, sigma3}) {
    // Zero is allowed: a degenerate draw collapses to its mean, which the
    // generator's noiseless test configurations rely on.
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw ConfigError("generator sigmas must be non-negative and finite");
    }
  }
  for (double v : {mu1, mu2, k3, b3, k_y, b_y}) {
    if (!std::isfinite(v)) {
      throw ConfigError("generator parameters must be finite");
    }
  }
}

FeatureSchema simple_bn_schema() {
  FeatureSchema schema;
  for (const char* name : {"a1", "a2", "a3"}) {
    Feature f;
    f.name = name;
    f.kind = FeatureKind::kContinuous;
    schema.features.push_back(std::move(f));
  }
  schema.label_column = "label";
  return schema;
}

Dataset generate_simple_bn(const SimpleBnParams& params, std::size_t n,
                           std::uint64_t seed,
                           std::vector<std::string>* warnings) {
  params.validate();
  if (n == 0) throw UsageError("sample count must be positive");
  Dataset data;
  data.schema = simple_bn_schema();
  data.rows.reserve(n);
  data.labels.reserve(n);
  Rng rng(seed);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a1 = rng.normal(params.mu1, params.sigma1);
    const double a2 = rng.normal(params.mu2, params.sigma2);
    const double sum = a1 + a2;
    const double a3 =
        rng.normal(params.k3 * sum * sum + params.b3, params.sigma3);
    const double p = sigmoid(params.k_y * a1 * a2 + params.b_y - a3);
    const int y = rng.bernoulli(p) ? 1 : 0;
    data.rows.push_back(Instance{{a1, a2, a3}});
    data.labels.push_back(y);
    positives += static_cast<std::size_t>(y);
  }
  const double pos_frac = static_cast<double>(positives) / static_cast<double>(n);
  const double minority = std::min(pos_frac, 1.0 - pos_frac);
  if (warnings != nullptr && minority < kMinorityWarnFraction) {
    warnings->push_back(
        "minority class holds only " + format_double(minority * 100.0) +
        "% of samples; a classifier trained on this draw may be degenerate");
  }
  return data;
}

}  // namespace proce
