#include "proce/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "proce/error.hpp"
#include "proce/util.hpp"
#include "proce/version.hpp"

namespace fs = std::filesystem;

namespace proce {

namespace {

std::string sibling_path(const std::string& csv_path,
                         const std::string& suffix) {
  fs::path p(csv_path);
  p.replace_extension();
  return p.string() + suffix;
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) {
    throw IoError("cannot create directory " + parent.string() + ": " +
                  ec.message());
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory " + dir + ": " + ec.message());
  }
}

std::string report_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "report_%05zu.json", index);
  return buf;
}

}  // namespace

GenSimpleBnResult run_gen_simple_bn(const GenSimpleBnOptions& opts,
                                    const Json& config_echo) {
  if (opts.out_csv.empty()) throw ConfigError("output CSV path is required");
  GenSimpleBnResult result;
  Dataset data = generate_simple_bn(opts.params, opts.n, opts.seed,
                                    &result.warnings);
  result.n = data.size();
  std::size_t positives = 0;
  for (int y : data.labels) positives += static_cast<std::size_t>(y);
  result.positive_fraction =
      static_cast<double>(positives) / static_cast<double>(data.size());

  ensure_parent_dir(opts.out_csv);
  write_csv(data, opts.out_csv);
  result.csv_path = opts.out_csv;

  Json schema_doc = schema_to_json(data.schema);
  schema_doc["config_echo"] = config_echo;
  result.schema_path = sibling_path(opts.out_csv, ".schema.json");
  save_json_file(result.schema_path, schema_doc);

  CausalGraph graph;
  graph.nodes = {"a1", "a2", "a3"};
  graph.edges = {{"a1", "a3"}, {"a2", "a3"}};
  Json graph_doc = graph_to_json(graph);
  graph_doc["config_echo"] = config_echo;
  result.graph_path = sibling_path(opts.out_csv, ".graph.json");
  save_json_file(result.graph_path, graph_doc);
  return result;
}

TrainSummary run_train(const TrainOptions& opts, const Json& config_echo) {
  if (opts.data_csv.empty() || opts.schema_path.empty() ||
      opts.out_dir.empty()) {
    throw ConfigError("train needs --data, --schema and --out");
  }
  FeatureSchema schema = schema_from_json(load_json_file(opts.schema_path));
  if (!opts.label_override.empty()) {
    schema.label_column = opts.label_override;
    schema.validate();
  }
  const Dataset raw = load_csv(opts.data_csv, schema);
  auto [train_raw, test_raw] = split(raw, opts.train_ratio, opts.seed);
  if (train_raw.rows.empty() || test_raw.rows.empty()) {
    throw DataError("split produced an empty side; need more rows");
  }
  const Normalizer norm = fit_normalizer(train_raw);
  const Dataset train = apply_normalizer(train_raw, norm);
  const Dataset test = apply_normalizer(test_raw, norm);

  TrainConfig clf_cfg;
  clf_cfg.epochs = opts.classifier_epochs;
  clf_cfg.batch_size = opts.batch_size;
  clf_cfg.learning_rate = opts.learning_rate;
  clf_cfg.seed = Rng::derive(opts.seed, 100);
  const ClassifierTrainResult clf = train_classifier(train, opts.preset,
                                                     clf_cfg);

  AutoencoderConfig ae_cfg;
  ae_cfg.embedding_dim = opts.embedding_dim;
  ae_cfg.cat_embedding_dim = opts.cat_embedding_dim;
  ae_cfg.hidden_dim = opts.ae_hidden_dim;
  ae_cfg.train = clf_cfg;
  ae_cfg.train.epochs = opts.ae_epochs;
  ae_cfg.train.seed = Rng::derive(opts.seed, 200);
  const AutoencoderTriple triple = train_class_autoencoders(train, ae_cfg);

  TrainSummary summary;
  summary.train_rows = train.size();
  summary.test_rows = test.size();
  summary.train_accuracy = accuracy(clf.classifier, train);
  summary.test_accuracy = accuracy(clf.classifier, test);
  summary.classifier_final_loss = clf.history.loss_history.back();
  // The full-data autoencoder backs both the prototype search and IM2.
  summary.autoencoder_final_loss =
      reconstruction_error(triple.full, schema, train.rows[0]);

  ensure_dir(opts.out_dir);
  const fs::path dir(opts.out_dir);
  save_json_file((dir / "schema.json").string(), schema_to_json(schema));
  save_json_file((dir / "normalizer.json").string(),
                 normalizer_to_json(norm, schema));
  save_json_file((dir / "classifier.json").string(),
                 classifier_to_json(clf.classifier));
  save_json_file((dir / "ae_full.json").string(),
                 autoencoder_to_json(triple.full, schema));
  save_json_file((dir / "ae_class0.json").string(),
                 autoencoder_to_json(triple.class0, schema));
  save_json_file((dir / "ae_class1.json").string(),
                 autoencoder_to_json(triple.class1, schema));
  write_csv(train_raw, (dir / "train.csv").string());
  write_csv(test_raw, (dir / "test.csv").string());
  save_json_file(
      (dir / "manifest.json").string(),
      Json{{"version", kFormatVersion},
           {"tool_version", kVersion},
           {"preset", classifier_preset_name(opts.preset)},
           {"embedding_dim", opts.embedding_dim},
           {"cat_embedding_dim", opts.cat_embedding_dim},
           {"seed", opts.seed},
           {"schema_fingerprint", schema.fingerprint()},
           {"train_rows", summary.train_rows},
           {"test_rows", summary.test_rows},
           {"train_accuracy", summary.train_accuracy},
           {"test_accuracy", summary.test_accuracy},
           {"config_echo", config_echo}});
  return summary;
}

LoadedBundle load_bundle(const std::string& dir) {
  if (dir.empty()) throw ConfigError("bundle directory is required");
  const fs::path base(dir);
  if (!fs::is_directory(base)) {
    throw IoError("bundle directory does not exist: " + dir);
  }
  LoadedBundle bundle;
  bundle.schema =
      schema_from_json(load_json_file((base / "schema.json").string()));
  bundle.normalizer = normalizer_from_json(
      load_json_file((base / "normalizer.json").string()), bundle.schema);
  bundle.classifier =
      classifier_from_json(load_json_file((base / "classifier.json").string()));
  bundle.autoencoders.full = autoencoder_from_json(
      load_json_file((base / "ae_full.json").string()), bundle.schema);
  bundle.autoencoders.class0 = autoencoder_from_json(
      load_json_file((base / "ae_class0.json").string()), bundle.schema);
  bundle.autoencoders.class1 = autoencoder_from_json(
      load_json_file((base / "ae_class1.json").string()), bundle.schema);
  const Dataset train_raw =
      load_csv((base / "train.csv").string(), bundle.schema);
  bundle.test_raw = load_csv((base / "test.csv").string(), bundle.schema);
  bundle.train_norm = apply_normalizer(train_raw, bundle.normalizer);
  bundle.test_norm = apply_normalizer(bundle.test_raw, bundle.normalizer);

  const std::string fp = bundle.schema.fingerprint();
  if (bundle.classifier.schema_fingerprint != fp) {
    throw SchemaError("bundle classifier/schema fingerprint mismatch");
  }
  return bundle;
}

StructuralModel run_fit_scm(const FitScmOptions& opts,
                            const Json& config_echo) {
  if (opts.data_csv.empty() || opts.graph_path.empty() ||
      opts.out_path.empty()) {
    throw ConfigError("fit-scm needs --data, --graph and --out");
  }
  if (opts.schema_path.empty() == opts.bundle_dir.empty()) {
    throw ConfigError("fit-scm needs exactly one of --schema or --bundle");
  }
  FeatureSchema schema;
  std::optional<Normalizer> norm;
  if (!opts.bundle_dir.empty()) {
    const fs::path base(opts.bundle_dir);
    schema = schema_from_json(load_json_file((base / "schema.json").string()));
    norm = normalizer_from_json(
        load_json_file((base / "normalizer.json").string()), schema);
  } else {
    schema = schema_from_json(load_json_file(opts.schema_path));
  }
  const Dataset raw = load_csv(opts.data_csv, schema);
  if (!norm.has_value()) norm = fit_normalizer(raw);
  const Dataset data = apply_normalizer(raw, *norm);
  const CausalGraph graph = graph_from_json(load_json_file(opts.graph_path));
  StructuralModel model =
      fit_structural_model(data, graph, opts.force_categorical_exogenous);
  Json doc = scm_to_json(model);
  doc["config_echo"] = config_echo;
  doc["tool_version"] = kVersion;
  ensure_parent_dir(opts.out_path);
  save_json_file(opts.out_path, doc);
  return model;
}

ExplainSummary run_explain(const ExplainOptions& opts,
                           const Json& config_echo) {
  if (opts.scm_path.empty() || opts.out_dir.empty()) {
    throw ConfigError("explain needs --bundle, --scm and --out");
  }
  const LoadedBundle loaded = load_bundle(opts.bundle_dir);
  const StructuralModel scm = scm_from_json(load_json_file(opts.scm_path));

  ModelBundle bundle;
  bundle.schema = loaded.schema;
  bundle.classifier = loaded.classifier;
  bundle.autoencoder = loaded.autoencoders.full;
  bundle.scm = scm;
  bundle.train = loaded.train_norm;
  bundle.build_latent_cache();
  bundle.validate();

  // Resolve the instances to explain: inline JSON or test-split rows.
  struct Job {
    std::size_t index = 0;  // row index, also the seed stream and file name
    Instance x_org;         // normalized
  };
  std::vector<Job> jobs_list;
  if (!opts.instance_json_path.empty() || !opts.instance_json_text.empty()) {
    if (!opts.indices.empty() || opts.count > 0) {
      throw ConfigError(
          "an inline instance cannot be combined with row indices or --count");
    }
    Json doc;
    if (!opts.instance_json_path.empty()) {
      doc = load_json_file(opts.instance_json_path);
    } else {
      try {
        doc = Json::parse(opts.instance_json_text);
      } catch (const Json::parse_error& e) {
        throw ParseError(std::string("inline instance JSON: ") + e.what());
      }
    }
    const Instance raw = raw_instance_from_json(doc, loaded.schema);
    jobs_list.push_back(
        {0, loaded.normalizer.normalize(loaded.schema, raw)});
  } else {
    std::vector<std::size_t> indices = opts.indices;
    if (opts.count > 0) {
      for (std::size_t i = 0; i < opts.count; ++i) indices.push_back(i);
    }
    if (indices.empty()) {
      throw ConfigError("explain needs --instance, --count or --instance-file");
    }
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    for (std::size_t idx : indices) {
      if (idx >= loaded.test_norm.size()) {
        throw UsageError("test row " + std::to_string(idx) +
                         " is out of range (test split has " +
                         std::to_string(loaded.test_norm.size()) + " rows)");
      }
      jobs_list.push_back({idx, loaded.test_norm.rows[idx]});
    }
  }

  std::vector<ExplanationReport> reports(jobs_list.size());
  auto run_one = [&](std::size_t j) {
    const Job& job = jobs_list[j];
    ExplainRequest request;
    request.x_org = job.x_org;
    request.y_org = bundle.classifier.predict_class(job.x_org);
    request.y_cf = opts.target_class < 0 ? 1 - request.y_org
                                         : opts.target_class;
    request.ga = opts.ga;
    // Every instance gets its own derived stream, so results do not depend
    // on --jobs or on which other instances run alongside.
    request.ga.seed = Rng::derive(opts.ga.seed, job.index);
    request.k_neighbors = opts.k_neighbors;
    reports[j] = run_proce(request, bundle);
    reports[j].seed = opts.ga.seed;  // echo the user-facing seed
  };

  const std::size_t worker_count =
      std::max<std::size_t>(1, std::min(opts.jobs, jobs_list.size()));
  if (worker_count == 1) {
    for (std::size_t j = 0; j < jobs_list.size(); ++j) run_one(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) {
      workers.emplace_back([&] {
        for (std::size_t j = next.fetch_add(1); j < jobs_list.size();
             j = next.fetch_add(1)) {
          run_one(j);
        }
      });
    }
    for (std::thread& t : workers) t.join();
  }

  ensure_dir(opts.out_dir);
  ExplainSummary summary;
  summary.total = reports.size();
  for (std::size_t j = 0; j < reports.size(); ++j) {
    const std::string path =
        (fs::path(opts.out_dir) / report_filename(jobs_list[j].index))
            .string();
    save_json_file(path,
                   report_to_json(reports[j], loaded.schema, config_echo));
    summary.report_paths.push_back(path);
    if (reports[j].valid) ++summary.valid;
    summary.mean_runtime_seconds += reports[j].runtime_seconds;
  }
  summary.mean_runtime_seconds /= static_cast<double>(reports.size());
  return summary;
}

EvaluateSummary run_evaluate(const EvaluateOptions& opts,
                             const Json& config_echo) {
  if (opts.reports_dir.empty() || opts.out_csv.empty()) {
    throw ConfigError("evaluate needs --reports, --bundle and --out");
  }
  const LoadedBundle loaded = load_bundle(opts.bundle_dir);

  std::vector<std::string> report_files;
  {
    const fs::path dir(opts.reports_dir);
    if (!fs::is_directory(dir)) {
      throw IoError("reports directory does not exist: " + opts.reports_dir);
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      if (name.starts_with("report_") && name.ends_with(".json")) {
        report_files.push_back(entry.path().string());
      }
    }
    std::sort(report_files.begin(), report_files.end());
  }
  if (report_files.empty()) {
    throw UsageError("no report_*.json files found in " + opts.reports_dir);
  }
  std::vector<EvalSample> samples;
  for (const std::string& path : report_files) {
    samples.push_back(
        to_eval_sample(report_from_json(load_json_file(path), loaded.schema)));
  }

  std::vector<ConstraintSpec> constraints;
  if (!opts.constraints_path.empty()) {
    constraints = constraints_from_json(load_json_file(opts.constraints_path),
                                        loaded.schema);
  }

  EvaluateSummary summary;
  summary.metrics = compute_metrics(samples, loaded.classifier,
                                    loaded.autoencoders, loaded.schema,
                                    constraints);

  Json doc = metrics_to_json(summary.metrics, opts.method_tag,
                             opts.dataset_tag, config_echo);
  if (!opts.compare_path.empty()) {
    const MetricsReport other =
        metrics_from_json(load_json_file(opts.compare_path));
    const std::vector<
        std::pair<std::string, std::pair<const std::vector<double>*,
                                         const std::vector<double>*>>>
        pairs = {
            {"tcv", {&summary.metrics.tcv_per_sample, &other.tcv_per_sample}},
            {"ccv", {&summary.metrics.ccv_per_sample, &other.ccv_per_sample}},
            {"cat_proximity",
             {&summary.metrics.cat_per_sample, &other.cat_per_sample}},
            {"con_proximity",
             {&summary.metrics.con_per_sample, &other.con_per_sample}},
            {"im1", {&summary.metrics.im1_per_sample, &other.im1_per_sample}},
            {"im2", {&summary.metrics.im2_per_sample, &other.im2_per_sample}},
            {"runtime_seconds",
             {&summary.metrics.runtime_per_sample, &other.runtime_per_sample}},
        };
    Json comparisons = Json::array();
    for (const auto& [name, vecs] : pairs) {
      if (vecs.first->size() != vecs.second->size() || vecs.first->size() < 2) {
        continue;  // not comparable pairwise
      }
      MetricComparison cmp;
      cmp.metric = name;
      cmp.test = paired_t_test(*vecs.first, *vecs.second);
      comparisons.push_back(Json{{"metric", name},
                                 {"t", cmp.test.t},
                                 {"df", cmp.test.df},
                                 {"p", cmp.test.p},
                                 {"degenerate", cmp.test.degenerate}});
      summary.comparisons.push_back(std::move(cmp));
    }
    doc["comparisons"] = std::move(comparisons);
  }

  ensure_parent_dir(opts.out_csv);
  write_text_file(opts.out_csv, metrics_to_csv(summary.metrics,
                                               opts.method_tag,
                                               opts.dataset_tag));
  summary.csv_path = opts.out_csv;
  fs::path json_path(opts.out_csv);
  json_path.replace_extension(".json");
  save_json_file(json_path.string(), doc);
  summary.json_path = json_path.string();
  return summary;
}

}  // namespace proce
